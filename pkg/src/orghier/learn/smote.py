"""Synthetic minority oversampling."""

from __future__ import annotations

import warnings

import numpy as np


def smote(X, y, k: int = 5, seed: int = 0):
    """Oversample every class up to the majority class size.

    Each synthetic row is ``x + lam * (nn - x)`` with ``x`` a random member
    of the class, ``nn`` drawn uniformly from its ``k`` nearest same-class
    neighbours (Euclidean; ``k`` clamped to class size - 1) and
    ``lam ~ U(0, 1)``.  Original rows come first, unchanged.  A class with a
    single member can only be duplicated; a warning says so.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if len(X) != len(y):
        raise ValueError("X and y differ in length")
    rng = np.random.default_rng(seed)
    classes, sizes = np.unique(y, return_counts=True)
    target = sizes.max()
    new_X, new_y = [X], [y]
    for cls, size in zip(classes, sizes):
        need = target - size
        if need == 0:
            continue
        members = X[y == cls]
        if size == 1:
            warnings.warn(f"class {cls!r} has one sample; duplicating instead of interpolating")
            new_X.append(np.repeat(members, need, axis=0))
            new_y.append(np.full(need, cls, dtype=y.dtype))
            continue
        kk = min(k, size - 1)
        d = np.linalg.norm(members[:, None, :] - members[None, :, :], axis=2)
        np.fill_diagonal(d, np.inf)
        nn = np.argsort(d, axis=1, kind="stable")[:, :kk]
        base = rng.integers(0, size, size=need)
        pick = nn[base, rng.integers(0, kk, size=need)]
        lam = rng.random(need)[:, None]
        new_X.append(members[base] + lam * (members[pick] - members[base]))
        new_y.append(np.full(need, cls, dtype=y.dtype))
    return np.vstack(new_X), np.concatenate(new_y)
