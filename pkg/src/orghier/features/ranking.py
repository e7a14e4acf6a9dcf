"""Feature rankings (Gini importance, chi-squared) and top-fraction selection."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .table import FeatureTable


@dataclass(frozen=True)
class FeatureRanking:
    items: tuple[tuple[str, float], ...]

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.items]

    def score(self, name: str) -> float:
        return dict(self.items)[name]

    def __iter__(self):
        return iter(self.items)

    def __len__(self):
        return len(self.items)


def _rank(names, scores) -> FeatureRanking:
    order = sorted(range(len(names)), key=lambda i: (-scores[i], i))
    return FeatureRanking(tuple((names[i], float(scores[i])) for i in order))


def rank_features_gini(model, table: FeatureTable) -> FeatureRanking:
    """Rank by impurity decrease summed over the model's trees, normalised to sum 1.

    Ties keep the table's column order.
    """
    if model is None or not hasattr(model, "impurity_decrease"):
        from ..learn import NotFittedError
        raise NotFittedError("a fitted tree or forest is required")
    raw = np.asarray(model.impurity_decrease(), dtype=float)
    if len(raw) != len(table.names):
        raise ValueError(f"model was fitted on {len(raw)} features, table has {len(table.names)}")
    total = raw.sum()
    scores = raw / total if total > 0 else raw
    return _rank(table.names, scores)


def chi2_scores(X, y) -> np.ndarray:
    """Chi-squared statistic of each non-negative feature against the class label.

    Features are min-max scaled to ``[0, 1]`` and treated as frequencies:
    observed = per-class column sums, expected = class share times the
    column total.  Constant columns score 0.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if (X < 0).any():
        raise ValueError("chi-squared ranking needs non-negative features")
    lo, hi = X.min(axis=0), X.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    scaled = np.where(hi > lo, (X - lo) / span, 0.0)
    classes = np.unique(y)
    onehot = (y[:, None] == classes[None, :]).astype(float)
    observed = onehot.T @ scaled
    expected = onehot.mean(axis=0)[:, None] * scaled.sum(axis=0)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(expected > 0, (observed - expected) ** 2 / expected, 0.0)
    return terms.sum(axis=0)


def rank_features_chi2(table: FeatureTable, labels=None) -> FeatureRanking:
    y = table.labels if labels is None else np.asarray(labels)
    return _rank(table.names, chi2_scores(table.X, y))


def n_selected(n_features: int, fraction: float) -> int:
    """``round(fraction * n_features)`` rounding halves up, at least 1."""
    if not 0 < fraction <= 1:
        raise ValueError("fraction must lie in (0, 1]")
    exact = Decimal(repr(fraction)) * n_features
    return max(1, int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP)))


def select_top_features(table: FeatureTable, ranking: FeatureRanking, fraction: float) -> FeatureTable:
    """Keep the highest-ranked ``n_selected`` features, in the table's column order."""
    if set(ranking.names) != set(table.names):
        raise ValueError("ranking and table cover different features")
    keep = set(ranking.names[: n_selected(len(table.names), fraction)])
    return table.select(n for n in table.names if n in keep)


def write_ranking(ranking: FeatureRanking, path, delimiter: str = ";") -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(("rank", "feature", "score"))
        for i, (name, score) in enumerate(ranking, start=1):
            w.writerow((i, name, f"{score:.10g}"))
    return path
