from __future__ import annotations

import numpy as np

MANAGEMENT = 1
REGULAR = 3


def flatten_labels(y, levels: int):
    """Collapse hierarchy levels.

    ``levels=3`` leaves labels alone; ``levels=2`` maps both management
    levels to :data:`MANAGEMENT` (1) and keeps regular staff as
    :data:`REGULAR` (3), so a smaller label still means a higher position.
    """
    y = np.asarray(y)
    if not np.isin(y, (1, 2, 3)).all():
        raise ValueError("hierarchy labels must be 1, 2 or 3")
    if levels == 3:
        return y.copy()
    if levels == 2:
        return np.where(y == 3, REGULAR, MANAGEMENT).astype(y.dtype)
    raise ValueError(f"levels must be 2 or 3, not {levels!r}")


def macro_f1(y_true, y_pred) -> float:
    """Unweighted mean F1 over the classes present in ``y_true``.

    A class with no true positives scores 0.
    """
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {len(y_true)} vs {len(y_pred)}")
    if len(y_true) == 0:
        raise ValueError("empty label vectors")
    scores = []
    for c in np.unique(y_true):
        tp = np.sum((y_true == c) & (y_pred == c))
        fp = np.sum((y_true != c) & (y_pred == c))
        fn = np.sum((y_true == c) & (y_pred != c))
        denom = 2 * tp + fp + fn
        scores.append(2 * tp / denom if denom else 0.0)
    return float(np.mean(scores))


def random_baseline(y, seed: int = 0, trials: int = 1000) -> float:
    """Mean macro-F1 of labels drawn uniformly from the classes of ``y``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    y = np.asarray(y)
    classes = np.unique(y)
    rng = np.random.default_rng(seed)
    return float(np.mean([macro_f1(y, classes[rng.integers(0, len(classes), len(y))]) for _ in range(trials)]))
