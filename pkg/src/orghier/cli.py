"""Command-line entry point: ``orghier <command> [options]``.

Exit status is 0 on success, 1 for usage errors and 2 for data errors.
Diagnostics go to stderr; stdout carries only data and output paths.

Options may also come from a flat ``key = value`` file given with
``--config`` (keys are option names, dashes or underscores, ``#`` starts a
comment).  Command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import collective, datasets, experiment, ingest
from .features.ranking import rank_features_chi2, rank_features_gini, select_top_features, write_ranking
from .features.table import FEATURES, write_table
from .learn.metrics import flatten_labels
from .learn.model_selection import fit_model, grid_search, holdout_evaluate

logger = logging.getLogger("orghier")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


DEFAULTS = {
    "dataset": None,
    "data_dir": None,
    "emails": None,
    "roster": None,
    "format": None,
    "delimiter": None,
    "overtime": None,
    "activity": None,
    "closeness": "scaled",
    "paths": "unweighted",
    "cliques": "maximal",
    "overtime_unit": "days",
    "levels": "2",
    "min_activity": None,
    "fraction": None,
    "known_fraction": None,
    "seed": "0",
    "jobs": "1",
    "out": None,
    "algorithm": None,
    "holdout": None,
    "utility": "indegree",
    "threshold": "1",
    "jaccard": "0.7",
    "u_max": "2",
    "scope": "unknown_only",
    "max_depth": None,
    "n_estimators": None,
    "folds": "5",
}


def read_config(path) -> dict[str, str]:
    """Parse a flat ``key = value`` file."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


def _settings(args) -> dict[str, str | None]:
    conf = read_config(args.config) if args.config else {}
    merged = dict(DEFAULTS)
    merged.update(conf)
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            merged[key] = v
    return merged


def _int(s, name) -> int:
    try:
        return int(s)
    except (TypeError, ValueError):
        raise UsageError(f"--{name.replace('_', '-')} expects an integer, got {s!r}") from None


def _float(s, name) -> float:
    try:
        return float(s)
    except (TypeError, ValueError):
        raise UsageError(f"--{name.replace('_', '-')} expects a number, got {s!r}") from None


def _list(s, conv, name):
    if s is None:
        return None
    return tuple(conv(p.strip(), name) for p in str(s).split(",") if p.strip())


def _bool(s) -> bool:
    if str(s).lower() in ("1", "true", "yes", "on"):
        return True
    if str(s).lower() in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {s!r}")


def dataset_config(cfg) -> datasets.DatasetConfig:
    name = cfg["dataset"]
    if name is None:
        raise UsageError("--dataset is required")
    if cfg["emails"] or cfg["roster"]:
        if not (cfg["emails"] and cfg["roster"]):
            raise UsageError("custom datasets need both emails and roster paths")
        dc = datasets.DatasetConfig(name, Path(cfg["emails"]), Path(cfg["roster"]))
    else:
        try:
            dc = datasets.preset(name, cfg["data_dir"])
        except ValueError as e:
            raise UsageError(str(e)) from None
    changes = {}
    if cfg["format"] is not None:
        if cfg["format"] not in ("iso8601", "epoch"):
            raise UsageError("--format must be iso8601 or epoch")
        changes["format"] = cfg["format"]
    if cfg["delimiter"] is not None:
        changes["delimiter"] = cfg["delimiter"]
    if cfg["overtime"] is not None:
        changes["overtime"] = _bool(cfg["overtime"])
    if cfg["activity"] is not None:
        if cfg["activity"] not in ("sent", "any"):
            raise UsageError("--activity must be sent or any")
        changes["activity"] = cfg["activity"]
    for key, allowed in (("closeness", ("scaled", "literal")), ("paths", ("unweighted", "weighted")),
                         ("cliques", ("maximal", "all")), ("overtime_unit", ("days", "messages"))):
        if cfg[key] not in allowed:
            raise UsageError(f"--{key.replace('_', '-')} must be one of {allowed}")
    features = replace(dc.features, closeness=cfg["closeness"], paths=cfg["paths"], cliques=cfg["cliques"],
                       overtime_unit=cfg["overtime_unit"])
    dc = replace(dc, features=features, **changes)
    if dc.overtime and dc.format != "iso8601":
        raise UsageError("overtime needs local iso8601 timestamps")
    return dc


def _levels(cfg) -> int:
    lv = _int(cfg["levels"], "levels")
    if lv not in (2, 3):
        raise UsageError("--levels must be 2 or 3")
    return lv


def _single(cfg, key, conv, default):
    vals = _list(cfg[key], conv, key)
    if vals is None:
        return default
    if len(vals) != 1:
        raise UsageError(f"--{key.replace('_', '-')} takes one value for this command")
    return vals[0]


def _out(cfg, default) -> Path:
    return Path(cfg["out"] or default)


def _model_grid(cfg, algorithm, n_features) -> dict:
    grid = {}
    if cfg["max_depth"]:
        grid["max_depth"] = list(_list(cfg["max_depth"], _int, "max_depth"))
    if cfg["n_estimators"]:
        grid["n_estimators"] = list(_list(cfg["n_estimators"], _int, "n_estimators"))
    return experiment.SweepSpec("-", algorithm, grid=grid).model_grid(n_features)


def _algorithm(cfg, allowed, default):
    alg = cfg["algorithm"] or default
    if alg not in allowed:
        raise UsageError(f"--algorithm must be one of {allowed}")
    return alg


def _write_rows(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter=";", lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def cmd_validate(cfg) -> int:
    """Ingest a dataset; report roster counts, dropped records and monthly activity."""
    ds = datasets.load_dataset(dataset_config(cfg))
    counts = ds.roster.counts()
    lines = [f"employees;{len(ds.roster)}"]
    lines += [f"level_{lv};{counts[lv]}" for lv in (1, 2, 3)]
    lines += [f"records_kept;{ds.report.kept}", f"dropped_off_roster;{ds.report.off_roster}",
              f"dropped_self_loops;{ds.report.self_loops}"]
    hist = ds.activity.histogram()
    hist = {0: len(ds.roster) - sum(hist.values()), **hist}
    lines += [f"active_months_{m};{hist[m]}" for m in sorted(hist)]
    print("\n".join(lines))
    return 0


def cmd_features(cfg) -> int:
    """Write the feature table for one minimum-activity setting."""
    ds = datasets.load_dataset(dataset_config(cfg))
    ma = _single(cfg, "min_activity", _int, 1)
    prep = datasets.prepare(ds, ma)
    out = _out(cfg, f"{ds.config.name}_features_ma{ma}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_table(prep.table, out)
    print(out)
    return 0


def cmd_train(cfg) -> int:
    """Grid-search one (min_activity, fraction) cell; optionally score a held-out part."""
    algorithm = _algorithm(cfg, ("tree", "forest"), "forest")
    levels = _levels(cfg)
    seed = _int(cfg["seed"], "seed")
    ma = _single(cfg, "min_activity", _int, 1)
    fraction = _single(cfg, "fraction", _float, 1.0)
    folds = _int(cfg["folds"], "folds")
    ds = datasets.load_dataset(dataset_config(cfg))
    table = datasets.prepare(ds, ma).table
    y = flatten_labels(table.labels, levels)
    out = _out(cfg, f"train_{ds.config.name}_{algorithm}_{levels}l")
    out.mkdir(parents=True, exist_ok=True)
    if fraction < 1.0:
        full = grid_search(table.X, y, _model_grid(cfg, algorithm, len(table.names)), algorithm, folds, seed)
        model = fit_model(table.X, y, full.best_params, algorithm, seed)
        table = select_top_features(table, rank_features_gini(model, table), fraction)
    grid = _model_grid(cfg, algorithm, len(table.names))
    rows = []
    if cfg["holdout"] is not None:
        result, test_score = holdout_evaluate(table.X, y, grid, algorithm, _float(cfg["holdout"], "holdout"),
                                              folds, seed)
        rows.append(("holdout_macro_f1", repr(test_score)))
    else:
        result = grid_search(table.X, y, grid, algorithm, folds, seed)
    rows = [("cv_macro_f1", repr(result.best_score)), *((k, v) for k, v in result.best_params.items()),
            ("features", "|".join(table.names)), ("seed", seed), *rows]
    print(_write_rows(out / "train.csv", ("key", "value"), rows))
    model = fit_model(table.X, y, result.best_params, algorithm, seed)
    pred = model.predict(table.X)
    print(_write_rows(out / "predictions.csv", ("id", "level", "predicted"),
                      zip(table.nodes, y.tolist(), pred.tolist())))
    return 0


def cmd_collective(cfg) -> int:
    """Run collective classification once and write labels and transcript."""
    levels = _levels(cfg)
    ma = _single(cfg, "min_activity", _int, 1)
    known = _single(cfg, "known_fraction", _float, 0.5)
    if cfg["utility"] not in FEATURES:
        raise UsageError(f"--utility must be one of {FEATURES}")
    try:
        params = collective.CCParams(cfg["utility"], known, _int(cfg["threshold"], "threshold"),
                                     _float(cfg["jaccard"], "jaccard"), u_max=_int(cfg["u_max"], "u_max"),
                                     levels=levels)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if cfg["scope"] not in ("unknown_only", "all"):
        raise UsageError("--scope must be unknown_only or all")
    ds = datasets.load_dataset(dataset_config(cfg))
    prep = datasets.prepare(ds, ma)
    result = collective.run(prep.table, prep.network, params)
    out = _out(cfg, f"collective_{ds.config.name}_{levels}l")
    out.mkdir(parents=True, exist_ok=True)
    rows = [("macro_f1", repr(collective.evaluate_cc(result, scope=cfg["scope"]))), ("scope", cfg["scope"]),
            ("iterations", result.iterations), ("converged", int(result.converged)),
            ("fallback", int(result.fallback.sum()))]
    print(_write_rows(out / "collective.csv", ("key", "value"), rows))
    print(_write_rows(out / "labels.csv", ("id", "level", "predicted", "seed"),
                      zip(result.nodes, result.truth.tolist(), result.labels.tolist(), result.seeds.astype(int))))
    print(collective.write_transcript(result, out / "transcript.csv"))
    return 0


def cmd_sweep(cfg) -> int:
    """Run a sweep and write table.csv and meta.csv."""
    algorithm = _algorithm(cfg, experiment.ALGORITHMS, "forest")
    fractions = _list(cfg["known_fraction"] if algorithm == "collective" else cfg["fraction"], _float, "fraction")
    grid = {}
    if cfg["max_depth"]:
        grid["max_depth"] = list(_list(cfg["max_depth"], _int, "max_depth"))
    if cfg["n_estimators"]:
        grid["n_estimators"] = list(_list(cfg["n_estimators"], _int, "n_estimators"))
    dc = dataset_config(cfg)
    try:
        spec = experiment.SweepSpec(
            dc.name, algorithm, _levels(cfg),
            _list(cfg["min_activity"], _int, "min_activity") or experiment.MIN_ACTIVITY,
            fractions, _int(cfg["seed"], "seed"), grid or None, _int(cfg["folds"], "folds"),
        )
    except ValueError as e:
        raise UsageError(str(e)) from None
    ds = datasets.load_dataset(dc)
    table = experiment.run_sweep(spec, ds, jobs=_int(cfg["jobs"], "jobs"))
    out = experiment.emit_results(table, experiment.result_dir(_out(cfg, "results"), spec))
    print(out / "table.csv")
    print(out / "meta.csv")
    return 0


def cmd_report(cfg) -> int:
    """Gini and chi-squared feature rankings of the full-feature grid-search winner."""
    algorithm = _algorithm(cfg, ("tree", "forest"), "forest")
    levels = _levels(cfg)
    seed = _int(cfg["seed"], "seed")
    ds = datasets.load_dataset(dataset_config(cfg))
    out = _out(cfg, f"report_{ds.config.name}_{algorithm}_{levels}l")
    out.mkdir(parents=True, exist_ok=True)
    for ma in _list(cfg["min_activity"], _int, "min_activity") or (1,):
        table = datasets.prepare(ds, ma).table
        y = flatten_labels(table.labels, levels)
        result = grid_search(table.X, y, _model_grid(cfg, algorithm, len(table.names)), algorithm,
                             _int(cfg["folds"], "folds"), seed)
        model = fit_model(table.X, y, result.best_params, algorithm, seed)
        print(write_ranking(rank_features_gini(model, table), out / f"gini_ma{ma}.csv"))
        print(write_ranking(rank_features_chi2(table, y), out / f"chi2_ma{ma}.csv"))
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "features": cmd_features,
    "train": cmd_train,
    "collective": cmd_collective,
    "sweep": cmd_sweep,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("dataset")
    g.add_argument("--config", help="key = value settings file")
    g.add_argument("--dataset", help="manufacturing, enron, or a name for --emails/--roster")
    g.add_argument("--data-dir", help=f"directory holding <dataset>/ (default ${datasets.DATA_ENV} or ./data)")
    g.add_argument("--emails", help="message log path for a custom dataset")
    g.add_argument("--roster", help="roster path for a custom dataset")
    g.add_argument("--format", help="timestamp format: iso8601 or epoch")
    g.add_argument("--delimiter", help="field delimiter of the input files")
    g.add_argument("--overtime", help="compute the overtime feature (true/false)")
    g.add_argument("--activity", help="what counts as an active month: sent or any")
    g.add_argument("--closeness", help="scaled (default) or literal")
    g.add_argument("--paths", help="unweighted (default) or weighted shortest paths")
    g.add_argument("--cliques", help="maximal (default) or all")
    g.add_argument("--overtime-unit", help="days (default) or messages")
    r = common.add_argument_group("run")
    r.add_argument("--levels", help="2 or 3 hierarchy levels")
    r.add_argument("--min-activity", help="minimum active months (comma list for sweeps)")
    r.add_argument("--fraction", help="feature fraction (comma list for sweeps)")
    r.add_argument("--known-fraction", help="known-node fraction (comma list for sweeps)")
    r.add_argument("--algorithm", help="tree, forest, collective or random-baseline")
    r.add_argument("--seed", help="master seed")
    r.add_argument("--jobs", help="parallel worker processes for sweeps")
    r.add_argument("--out", help="output file or directory")
    r.add_argument("--holdout", help="train: held-out fraction scored after the search")
    r.add_argument("--folds", help="cross-validation folds (default 5)")
    r.add_argument("--max-depth", help="comma list overriding the depth grid")
    r.add_argument("--n-estimators", help="comma list overriding the forest-size grid")
    r.add_argument("--utility", help="collective: utility feature")
    r.add_argument("--threshold", help="collective: majority-class divisor")
    r.add_argument("--jaccard", help="collective: Jaccard stop value")
    r.add_argument("--u-max", help="collective: tied rounds before forcing a label")
    r.add_argument("--scope", help="collective: unknown_only or all")
    r.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = _Parser(prog="orghier", description="Infer management hierarchy from e-mail metadata.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=fn.__doc__.splitlines()[0] if fn.__doc__ else name)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _settings(args)
        return COMMANDS[args.command](cfg)
    except UsageError as e:
        print(f"orghier: usage error: {e}", file=sys.stderr)
        return 1
    except (ingest.IngestError, OSError, ValueError) as e:
        print(f"orghier: data error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
