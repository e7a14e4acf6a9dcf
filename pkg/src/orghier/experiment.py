"""Parameter sweeps over minimum activity and feature / known-node fractions.

A sweep fills a table with one row per minimum-activity value and one
column per fraction.  Every cell draws its seed from the master seed and
its coordinates, so a cell can be recomputed alone and the schedule (or
``jobs``) never changes the numbers.
"""

from __future__ import annotations

import csv
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import collective
from .datasets import Dataset, Prepared, prepare
from .features.ranking import (
    FeatureRanking,
    n_selected,
    rank_features_chi2,
    rank_features_gini,
    select_top_features,
    write_ranking,
)
from .features.table import FeatureTable
from .learn.metrics import flatten_labels, random_baseline
from .learn.model_selection import FOREST_N_ESTIMATORS, GridResult, fit_model, grid_search
from .learn.seeds import derive_seed

logger = logging.getLogger(__name__)

ALGORITHMS = ("tree", "forest", "collective", "random-baseline")
MIN_ACTIVITY = (1, 2, 3, 4, 5)
FEATURE_FRACTIONS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class SweepSpec:
    """What to sweep.

    ``fractions`` are feature fractions for ``tree``/``forest`` and known-node
    fractions for ``collective``; ``None`` picks the standard list.  ``grid``
    may override ``max_depth`` and ``n_estimators`` lists; ``max_features``
    always runs from 1 to the number of selected features.
    """

    dataset: str
    algorithm: str
    levels: int = 2
    min_activity: tuple[int, ...] = MIN_ACTIVITY
    fractions: tuple[float, ...] | None = None
    seed: int = 0
    grid: dict | None = None
    folds: int = 5
    baseline_trials: int = 1000
    thresholds: tuple[int, ...] = collective.THRESHOLDS
    jaccard_values: tuple[float, ...] = collective.JACCARD_VALUES
    utility_features: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.levels not in (2, 3):
            raise ValueError("levels must be 2 or 3")
        if not self.min_activity or any(m < 1 for m in self.min_activity):
            raise ValueError("min_activity must be a non-empty list of positive integers")
        if self.fractions is not None and (not self.fractions or any(not 0 < f <= 1 for f in self.fractions)):
            raise ValueError("fractions must be a non-empty list of values in (0, 1]")

    @property
    def columns(self) -> tuple[float, ...]:
        if self.algorithm == "random-baseline":
            return (1.0,)
        if self.fractions is not None:
            return tuple(self.fractions)
        return collective.KNOWN_FRACTIONS if self.algorithm == "collective" else FEATURE_FRACTIONS

    def model_grid(self, n_features: int) -> dict:
        g = self.grid or {}
        out = {"max_depth": list(g.get("max_depth", range(1, 21))), "max_features": list(range(1, n_features + 1))}
        if self.algorithm == "forest":
            out["n_estimators"] = list(g.get("n_estimators", FOREST_N_ESTIMATORS))
        return out

    def cell_seed(self, min_activity: int, fraction: float) -> int:
        return derive_seed(self.seed, self.levels, min_activity, round(fraction * 1000))


@dataclass
class ResultTable:
    """Scores keyed by (min_activity, fraction) plus per-cell bookkeeping."""

    spec: SweepSpec
    rows: tuple[int, ...]
    columns: tuple[float, ...]
    scores: np.ndarray
    meta: dict = field(default_factory=dict)
    rankings: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scores.shape != (len(self.rows), len(self.columns)):
            raise ValueError("score matrix does not match the row/column keys")

    def complete(self) -> bool:
        return bool(np.isfinite(self.scores).all())

    def score(self, min_activity: int, fraction: float) -> float:
        return float(self.scores[self.rows.index(min_activity), self.columns.index(fraction)])

    def best(self) -> tuple[float, int, float]:
        i, j = np.unravel_index(np.argmax(self.scores), self.scores.shape)
        return float(self.scores[i, j]), self.rows[i], self.columns[j]


def _labels(table: FeatureTable, levels: int) -> np.ndarray:
    return flatten_labels(table.labels, levels)


def supervised_cell(table: FeatureTable, spec: SweepSpec, min_activity: int, fraction: float,
                    ranking: FeatureRanking | None) -> tuple[GridResult, FeatureTable]:
    """Grid-search one cell: select the top features, then cross-validate."""
    if fraction < 1.0:
        if ranking is None:
            raise ValueError("a ranking is needed below fraction 1.0")
        table = select_top_features(table, ranking, fraction)
    y = _labels(table, spec.levels)
    result = grid_search(table.X, y, spec.model_grid(len(table.names)), spec.algorithm,
                         k=spec.folds, seed=spec.cell_seed(min_activity, fraction))
    return result, table


def _supervised_task(args):
    table, spec, ma, frac, ranking = args
    t0 = time.perf_counter()
    result, sub = supervised_cell(table, spec, ma, frac, ranking)
    return ma, frac, result, sub.names, time.perf_counter() - t0


def _map(fn, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks))


def _prepare_all(ds: Dataset, spec: SweepSpec) -> dict[int, Prepared]:
    return {ma: prepare(ds, ma) for ma in spec.min_activity}


def _supervised_meta(ma, frac, result: GridResult, names, spec):
    p = result.best_params
    return {
        "score": result.best_score,
        "seed": spec.cell_seed(ma, frac),
        "max_depth": p["max_depth"],
        "max_features": p["max_features"],
        "n_estimators": p.get("n_estimators", ""),
        "n_features": len(names),
        "features": "|".join(names),
    }


def run_supervised_sweep(spec: SweepSpec, ds: Dataset, jobs: int = 1,
                         prepared: dict[int, Prepared] | None = None) -> ResultTable:
    """Tree or forest sweep.

    Per minimum activity: grid-search all features, refit the winner on all
    rows and rank features by its Gini importance (chi-squared ranking is
    recorded alongside), then grid-search every smaller fraction on the top
    features of that one ranking.
    """
    if spec.algorithm not in ("tree", "forest"):
        raise ValueError("supervised sweeps need algorithm 'tree' or 'forest'")
    prepared = prepared or _prepare_all(ds, spec)
    cols = spec.columns
    scores = np.full((len(spec.min_activity), len(cols)), np.nan)
    meta, rankings = {}, {}

    def record(ma, frac, result, names, secs):
        scores[spec.min_activity.index(ma), cols.index(frac)] = result.best_score
        meta[(ma, frac)] = _supervised_meta(ma, frac, result, names, spec)
        logger.info("%s %s %dl ma=%d frac=%s: %.4f (%.1fs)", spec.dataset, spec.algorithm, spec.levels,
                    ma, frac, result.best_score, secs)

    full = _map(_supervised_task, [(prepared[ma].table, spec, ma, 1.0, None) for ma in spec.min_activity], jobs)
    for ma, _, result, names, secs in full:
        table = prepared[ma].table
        y = _labels(table, spec.levels)
        model = fit_model(table.X, y, result.best_params, spec.algorithm, seed=spec.cell_seed(ma, 1.0))
        rankings[ma] = {"gini": rank_features_gini(model, table), "chi2": rank_features_chi2(table, y)}
        if 1.0 in cols:
            record(ma, 1.0, result, names, secs)

    rest = [(prepared[ma].table, spec, ma, f, rankings[ma]["gini"])
            for ma in spec.min_activity for f in cols if f != 1.0]
    for ma, frac, result, names, secs in _map(_supervised_task, rest, jobs):
        record(ma, frac, result, names, secs)
    return ResultTable(spec, tuple(spec.min_activity), cols, scores, meta, rankings)


def collective_cell(prep: Prepared, spec: SweepSpec, known_fraction: float) -> dict:
    """Search utility feature x threshold x Jaccard minimum for one cell.

    The winner maximises macro-F1 on the initially unlabelled nodes; every
    setting reaching that score is listed in ``winners``.
    """
    utilities = spec.utility_features or prep.table.names
    truth = _labels(prep.table, spec.levels)
    best, winners, first = -1.0, [], None
    for util in utilities:
        for thr in spec.thresholds:
            for jac in spec.jaccard_values:
                params = collective.CCParams(util, known_fraction, thr, jac, levels=spec.levels)
                res = collective.run(prep.table, prep.network, params)
                s = collective.evaluate_cc(res, truth, "unknown_only")
                if s > best:
                    best, winners, first = s, [], (res, params)
                if s == best:
                    winners.append(f"{util}/{thr}/{jac}")
    res, params = first
    return {
        "score": best,
        "score_all": collective.evaluate_cc(res, truth, "all"),
        "utility": params.utility_feature,
        "threshold": params.threshold,
        "jaccard": params.jaccard_min,
        "iterations": res.iterations,
        "converged": int(res.converged),
        "fallback": int(res.fallback.sum()),
        "n_winners": len(winners),
        "winners": "|".join(winners),
    }


def _collective_task(args):
    prep, spec, ma, frac = args
    return ma, frac, collective_cell(prep, spec, frac)


def run_collective_sweep(spec: SweepSpec, ds: Dataset, jobs: int = 1,
                         prepared: dict[int, Prepared] | None = None) -> ResultTable:
    if spec.algorithm != "collective":
        raise ValueError("collective sweeps need algorithm 'collective'")
    prepared = prepared or _prepare_all(ds, spec)
    cols = spec.columns
    scores = np.full((len(spec.min_activity), len(cols)), np.nan)
    meta = {}
    tasks = [(prepared[ma], spec, ma, f) for ma in spec.min_activity for f in cols]
    for ma, frac, cell in _map(_collective_task, tasks, jobs):
        scores[spec.min_activity.index(ma), cols.index(frac)] = cell["score"]
        meta[(ma, frac)] = cell
    hi = scores[:, cols.index(max(cols))].mean()
    lo = scores[:, cols.index(min(cols))].mean()
    if hi < lo:
        logger.warning("more known nodes scored lower on average (%.4f < %.4f)", hi, lo)
    return ResultTable(spec, tuple(spec.min_activity), cols, scores, meta)


def run_baseline_sweep(spec: SweepSpec, ds: Dataset, prepared: dict[int, Prepared] | None = None) -> ResultTable:
    """Mean macro-F1 of uniformly random labels, per minimum activity."""
    prepared = prepared or _prepare_all(ds, spec)
    scores = np.empty((len(spec.min_activity), 1))
    meta = {}
    for i, ma in enumerate(spec.min_activity):
        seed = spec.cell_seed(ma, 1.0)
        y = _labels(prepared[ma].table, spec.levels)
        scores[i, 0] = random_baseline(y, seed=seed, trials=spec.baseline_trials)
        meta[(ma, 1.0)] = {"score": scores[i, 0], "seed": seed, "trials": spec.baseline_trials, "n": len(y)}
    return ResultTable(spec, tuple(spec.min_activity), (1.0,), scores, meta)


def run_sweep(spec: SweepSpec, ds: Dataset, jobs: int = 1, prepared=None) -> ResultTable:
    t0 = time.perf_counter()
    if spec.algorithm in ("tree", "forest"):
        table = run_supervised_sweep(spec, ds, jobs, prepared)
    elif spec.algorithm == "collective":
        table = run_collective_sweep(spec, ds, jobs, prepared)
    else:
        table = run_baseline_sweep(spec, ds, prepared)
    logger.info("sweep %s/%s/%dl finished in %.1fs", spec.dataset, spec.algorithm, spec.levels,
                time.perf_counter() - t0)
    return table


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def result_dir(root, spec: SweepSpec) -> Path:
    return Path(root) / spec.dataset / spec.algorithm / f"{spec.levels}l"


def emit_results(table: ResultTable, path, delimiter: str = ";") -> Path:
    """Write ``table.csv`` and ``meta.csv`` (and rankings, if any) into ``path``.

    Files hold no timestamps or run times, so equal inputs give equal bytes.
    """
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "table.csv").open("w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(["min_activity", *(_fmt(float(c)) for c in table.columns)])
        for i, ma in enumerate(table.rows):
            w.writerow([ma, *(_fmt(v) for v in table.scores[i])])
    keys = []
    for cell in table.meta.values():
        keys.extend(k for k in cell if k not in keys)
    with (out / "meta.csv").open("w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(["min_activity", "fraction", *keys])
        for ma in table.rows:
            for frac in table.columns:
                cell = table.meta.get((ma, frac), {})
                w.writerow([ma, _fmt(float(frac)), *(_fmt(cell.get(k, "")) for k in keys)])
    for ma, by_kind in sorted(table.rankings.items()):
        for kind, ranking in by_kind.items():
            write_ranking(ranking, out / f"ranking_{kind}_ma{ma}.csv", delimiter)
    return out
