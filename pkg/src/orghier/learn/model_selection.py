"""Stratified cross-validation and grid search for trees and forests.

SMOTE is fitted on the training part of every fold only.  Grid points
that differ only in ``max_depth`` or ``n_estimators`` share their grown
trees: a tree is grown once to the deepest depth on the grid and
evaluated at every shallower depth, and forests of every size on the grid
are read off one forest of the largest size.  Both shortcuts give exactly
the models that training each grid point separately would give (see
:mod:`orghier.learn._cart`), which the test-suite checks against
:func:`naive_grid_search`.
"""

from __future__ import annotations

import itertools
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _cart
from .metrics import macro_f1
from .seeds import derive_seed
from .smote import smote
from .trees import bootstrap_indices, encode_labels, train_forest, train_tree, tree_key

logger = logging.getLogger(__name__)

FOREST_N_ESTIMATORS = [1, 2, 4, 8, 16, 32, 64, 100, 200]

_SMOTE_STREAM = 0x5307
_MODEL_STREAM = 0x30DE


def full_grid(model: str, n_features: int) -> dict[str, list[int]]:
    """The tree/forest search space: depth 1..20, every feature count, forest sizes 1..200."""
    grid = {"max_depth": list(range(1, 21)), "max_features": list(range(1, n_features + 1))}
    if model == "forest":
        grid["n_estimators"] = list(FOREST_N_ESTIMATORS)
    elif model != "tree":
        raise ValueError(f"model must be 'tree' or 'forest', not {model!r}")
    return grid


def grid_points(grid: dict) -> list[dict]:
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ValueError("grid must have at least one value per hyperparameter")
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def stratified_kfold(y, k: int = 5, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Shuffled stratified folds as ``(train_idx, valid_idx)`` pairs.

    Members of each class are dealt round-robin, continuing the fold
    pointer across classes, so per-class counts differ by at most one
    between folds.  ``k`` is lowered (with a warning) to the smallest class
    size when needed.
    """
    y = np.asarray(y)
    classes, sizes = np.unique(y, return_counts=True)
    if len(classes) < 2:
        raise ValueError("stratified folds need at least two classes")
    if sizes.min() < k:
        if sizes.min() < 2:
            raise ValueError("every class needs at least two members for cross-validation")
        warnings.warn(f"smallest class has {sizes.min()} members; using {sizes.min()} folds instead of {k}")
        k = int(sizes.min())
    rng = np.random.default_rng(seed)
    fold_of = np.empty(len(y), dtype=np.int64)
    pointer = 0
    for cls in classes:
        members = rng.permutation(np.flatnonzero(y == cls))
        fold_of[members] = (pointer + np.arange(len(members))) % k
        pointer = (pointer + len(members)) % k
    everything = np.arange(len(y))
    return [(everything[fold_of != f], everything[fold_of == f]) for f in range(k)]


@dataclass
class GridResult:
    best_params: dict
    best_score: float
    scores: list[tuple[dict, float]] = field(default_factory=list)
    fold_scores: dict = field(default_factory=dict)


def _fold_data(X, y, folds, seed, oversample, smote_k):
    for f, (tr, va) in enumerate(folds):
        if np.intersect1d(tr, va).size:
            raise AssertionError("training and validation folds overlap")
        Xtr, ytr = X[tr], y[tr]
        if oversample:
            Xtr, ytr = smote(Xtr, ytr, k=smote_k, seed=derive_seed(seed, f, _SMOTE_STREAM))
        yield f, np.ascontiguousarray(Xtr), ytr, np.ascontiguousarray(X[va]), y[va], derive_seed(seed, f, _MODEL_STREAM)


def _collect(grid, per_point):
    scores = []
    for p in grid_points(grid):
        key = tuple(p.values())
        scores.append((p, float(np.mean(per_point[key]))))
    best_p, best_s = scores[0]
    for p, s in scores[1:]:
        if s > best_s:
            best_p, best_s = p, s
    return GridResult(dict(best_p), best_s, scores, {k: list(v) for k, v in per_point.items()})


def grid_search(X, y, grid: dict, model: str = "forest", k: int = 5, seed: int = 0,
                oversample: bool = True, smote_k: int = 5) -> GridResult:
    """Exhaustive k-fold search maximising mean validation macro-F1.

    ``grid`` maps ``max_depth``, ``max_features`` and (forests)
    ``n_estimators`` to value lists.  Ties go to the earliest grid point
    in enumeration order.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    keys = ("max_depth", "max_features") + (("n_estimators",) if model == "forest" else ())
    if model not in ("tree", "forest"):
        raise ValueError(f"model must be 'tree' or 'forest', not {model!r}")
    if set(grid) != set(keys):
        raise ValueError(f"{model} grid needs exactly the keys {keys}")
    grid_points(grid)
    grid = {kk: list(grid[kk]) for kk in keys}
    if max(grid["max_features"]) > X.shape[1] or min(grid["max_features"]) < 1:
        raise ValueError("max_features values must lie in [1, n_features]")
    if min(grid["max_depth"]) < 1:
        raise ValueError("max_depth values must be >= 1")
    classes, _ = encode_labels(y)
    folds = stratified_kfold(y, k, seed)
    depth_cap = max(grid["max_depth"])
    per_point: dict = {}

    for f, Xtr, ytr, Xva, yva, model_seed in _fold_data(X, y, folds, seed, oversample, smote_k):
        _, codes = encode_labels(ytr, classes)
        for mf in grid["max_features"]:
            if model == "tree":
                idx = np.arange(len(Xtr), dtype=np.int64)
                arrs = _cart.build_tree(Xtr, codes, idx, len(classes), depth_cap, mf, tree_key(model_seed, 0))
                pred = _cart.predict_by_depth(arrs[0], arrs[1], arrs[2], arrs[3], arrs[5], Xva, depth_cap)
                for d in grid["max_depth"]:
                    score = macro_f1(yva, classes[pred[:, d - 1]])
                    per_point.setdefault((d, mf), []).append(score)
                continue
            wanted = set(grid["n_estimators"])
            votes = np.zeros((depth_cap, len(Xva), len(classes)), dtype=np.int64)
            di = np.arange(depth_cap)[None, :]
            si = np.arange(len(Xva))[:, None]
            for i in range(max(wanted)):
                idx = bootstrap_indices(len(Xtr), model_seed, i)
                arrs = _cart.build_tree(Xtr, codes, idx, len(classes), depth_cap, mf, tree_key(model_seed, i))
                pred = _cart.predict_by_depth(arrs[0], arrs[1], arrs[2], arrs[3], arrs[5], Xva, depth_cap)
                votes[di, si, pred] += 1
                if i + 1 in wanted:
                    for d in grid["max_depth"]:
                        score = macro_f1(yva, classes[np.argmax(votes[d - 1], axis=1)])
                        per_point.setdefault((d, mf, i + 1), []).append(score)
    return _collect(grid, per_point)


def naive_grid_search(X, y, grid: dict, model: str = "forest", k: int = 5, seed: int = 0,
                      oversample: bool = True, smote_k: int = 5) -> GridResult:
    """Reference implementation: trains every grid point from scratch."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    classes = np.unique(y)
    folds = stratified_kfold(y, k, seed)
    per_point: dict = {}
    for f, Xtr, ytr, Xva, yva, model_seed in _fold_data(X, y, folds, seed, oversample, smote_k):
        for p in grid_points(grid):
            if model == "tree":
                m = train_tree(Xtr, ytr, p["max_depth"], p["max_features"], seed=model_seed, classes=classes)
            else:
                m = train_forest(Xtr, ytr, p["max_depth"], p["max_features"], p["n_estimators"],
                                 seed=model_seed, classes=classes)
            per_point.setdefault(tuple(p.values()), []).append(macro_f1(yva, m.predict(Xva)))
    return _collect(grid, per_point)


def fit_model(X, y, params: dict, model: str, seed: int = 0, oversample: bool = True, smote_k: int = 5):
    """Fit one model on all rows (after SMOTE), e.g. the grid-search winner."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if oversample:
        X, y = smote(X, y, k=smote_k, seed=derive_seed(seed, _SMOTE_STREAM))
    model_seed = derive_seed(seed, _MODEL_STREAM)
    if model == "tree":
        return train_tree(X, y, params["max_depth"], params["max_features"], seed=model_seed)
    if model == "forest":
        return train_forest(X, y, params["max_depth"], params["max_features"], params["n_estimators"], seed=model_seed)
    raise ValueError(f"model must be 'tree' or 'forest', not {model!r}")


def holdout_split(y, fraction: float, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Stratified split; each class sends ``round(fraction * size)`` rows (at least one) to the test part."""
    if not 0 < fraction < 1:
        raise ValueError("holdout fraction must lie in (0, 1)")
    y = np.asarray(y)
    rng = np.random.default_rng(derive_seed(seed, 0x401D))
    test = []
    for cls in np.unique(y):
        members = rng.permutation(np.flatnonzero(y == cls))
        n_test = min(max(1, int(round(fraction * len(members)))), len(members) - 1)
        test.extend(members[:n_test].tolist())
    test = np.array(sorted(test), dtype=np.int64)
    train = np.setdiff1d(np.arange(len(y)), test)
    return train, test


def holdout_evaluate(X, y, grid: dict, model: str, fraction: float, k: int = 5, seed: int = 0,
                     oversample: bool = True) -> tuple[GridResult, float]:
    """Grid-search on a stratified training part, then score the refitted winner on the held-out part."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    train, test = holdout_split(y, fraction, seed)
    result = grid_search(X[train], y[train], grid, model, k, seed, oversample)
    fitted = fit_model(X[train], y[train], result.best_params, model, seed, oversample)
    return result, macro_f1(y[test], fitted.predict(X[test]))
