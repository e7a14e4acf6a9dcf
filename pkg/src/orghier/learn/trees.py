"""CART decision trees and random forests (Gini impurity)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _cart
from .seeds import derive_seed


class NotFittedError(ValueError):
    pass


def _check_xy(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("X must be a non-empty 2-D array")
    if len(y) != len(X):
        raise ValueError(f"X has {len(X)} rows but y has {len(y)} labels")
    if np.isnan(X).any():
        raise ValueError("X contains NaN")
    return X, y


def encode_labels(y, classes=None):
    """Map labels onto indices of the sorted class list (smaller label -> smaller index)."""
    classes = np.unique(y) if classes is None else np.asarray(classes)
    codes = np.searchsorted(classes, y)
    if np.any(codes >= len(classes)) or np.any(classes[np.minimum(codes, len(classes) - 1)] != y):
        raise ValueError("y contains labels outside the class list")
    return classes, codes.astype(np.int64)


def tree_key(seed: int, tree_index: int) -> np.uint64:
    return np.uint64(derive_seed(seed, tree_index, 0x7EE))


@dataclass(eq=False)
class TrainedTree:
    """A fitted CART tree stored as flat node arrays."""

    classes: np.ndarray
    n_features: int
    max_depth: int
    max_features: int
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    depth: np.ndarray
    counts: np.ndarray
    decrease: np.ndarray
    n_samples: int

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def actual_depth(self) -> int:
        return int(self.depth.max()) if self.n_nodes else 0

    def _arrays(self):
        return self.feature, self.threshold, self.left, self.right, self.counts

    def predict_proba(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        c = _cart.leaf_counts(*self._arrays(), X, self.max_depth)
        return c / c.sum(axis=1, keepdims=True)

    def predict_codes(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def predict(self, X) -> np.ndarray:
        return self.classes[self.predict_codes(X)]

    def impurity_decrease(self) -> np.ndarray:
        """Per-feature sum of weighted Gini decrease, as a fraction of the root sample count."""
        out = np.zeros(self.n_features)
        internal = self.feature >= 0
        np.add.at(out, self.feature[internal], self.decrease[internal] / self.n_samples)
        return out

    @property
    def feature_importances_(self) -> np.ndarray:
        raw = self.impurity_decrease()
        total = raw.sum()
        return raw / total if total > 0 else raw

    def truncated(self, max_depth: int) -> "TrainedTree":
        """The same tree cut at ``max_depth`` (equal to retraining with that limit)."""
        keep = self.depth <= max_depth
        feature = np.where(self.depth < max_depth, self.feature, -1)
        # node ids of kept nodes stay valid because children are always allocated after parents
        remap = np.cumsum(keep) - 1
        left = np.where(feature >= 0, remap[np.maximum(self.left, 0)], -1)
        right = np.where(feature >= 0, remap[np.maximum(self.right, 0)], -1)
        return TrainedTree(
            classes=self.classes, n_features=self.n_features, max_depth=max_depth,
            max_features=self.max_features, feature=feature[keep],
            threshold=np.where(feature >= 0, self.threshold, 0.0)[keep],
            left=left[keep], right=right[keep], depth=self.depth[keep], counts=self.counts[keep],
            decrease=np.where(feature >= 0, self.decrease, 0.0)[keep], n_samples=self.n_samples,
        )


def _grow(X, codes, sample_idx, n_classes, max_depth, max_features, key, classes) -> TrainedTree:
    feature, threshold, left, right, depth, counts, decrease = _cart.build_tree(
        X, codes, sample_idx, n_classes, max_depth, max_features, key)
    return TrainedTree(classes, X.shape[1], max_depth, max_features, feature, threshold,
                       left, right, depth, counts, decrease, len(sample_idx))


def _check_hyper(n_features, max_depth, max_features):
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    if not 1 <= max_features <= n_features:
        raise ValueError(f"max_features must lie in [1, {n_features}]")


def train_tree(X, y, max_depth: int, max_features: int | None = None, seed: int = 0,
               classes=None) -> TrainedTree:
    """Fit a CART tree.

    At each node ``max_features`` non-constant features are drawn without
    replacement; the split minimising weighted Gini impurity over midpoints
    of consecutive distinct values is taken if it strictly lowers impurity.
    """
    X, y = _check_xy(X, y)
    max_features = X.shape[1] if max_features is None else int(max_features)
    _check_hyper(X.shape[1], max_depth, max_features)
    classes, codes = encode_labels(y, classes)
    idx = np.arange(len(X), dtype=np.int64)
    return _grow(X, codes, idx, len(classes), int(max_depth), max_features, tree_key(seed, 0), classes)


@dataclass(eq=False)
class TrainedForest:
    trees: list[TrainedTree]
    classes: np.ndarray
    n_estimators: int
    bootstrap_seeds: list[int] = field(default_factory=list)

    def predict_codes(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        votes = np.zeros((len(X), len(self.classes)), dtype=np.int64)
        rows = np.arange(len(X))
        for t in self.trees:
            votes[rows, t.predict_codes(X)] += 1
        # plurality vote; argmax picks the smallest class index (highest level) on ties
        return np.argmax(votes, axis=1)

    def predict(self, X) -> np.ndarray:
        return self.classes[self.predict_codes(X)]

    def impurity_decrease(self) -> np.ndarray:
        return np.sum([t.impurity_decrease() for t in self.trees], axis=0)

    @property
    def feature_importances_(self) -> np.ndarray:
        raw = self.impurity_decrease()
        total = raw.sum()
        return raw / total if total > 0 else raw


def bootstrap_indices(n: int, seed: int, tree_index: int) -> np.ndarray:
    rng = np.random.default_rng(derive_seed(seed, tree_index, 0xB00))
    return rng.integers(0, n, size=n).astype(np.int64)


def train_forest(X, y, max_depth: int, max_features: int, n_estimators: int, seed: int = 0,
                 bootstrap: bool = True, classes=None) -> TrainedForest:
    """Random forest of ``n_estimators`` CART trees on bootstrap resamples.

    Tree ``i`` depends only on ``(seed, i)``, so a forest of ``n`` trees is
    the first ``n`` trees of any larger forest with the same seed.
    """
    X, y = _check_xy(X, y)
    _check_hyper(X.shape[1], max_depth, max_features)
    if n_estimators < 1:
        raise ValueError("n_estimators must be >= 1")
    classes, codes = encode_labels(y, classes)
    trees, seeds = [], []
    for i in range(n_estimators):
        if bootstrap:
            idx = bootstrap_indices(len(X), seed, i)
        else:
            idx = np.arange(len(X), dtype=np.int64)
        seeds.append(derive_seed(seed, i, 0xB00))
        trees.append(_grow(X, codes, idx, len(classes), int(max_depth), int(max_features),
                           tree_key(seed, i), classes))
    return TrainedForest(trees, classes, n_estimators, seeds)
