"""Per-employee feature table: assembly and delimited-text round trip."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..graph import SocialNetwork
from . import behaviour, centrality, cliques

FEATURES = (
    "indegree",
    "outdegree",
    "betweenness",
    "closeness",
    "eigenvector",
    "pagerank",
    "hub",
    "authority",
    "clustering",
    "clique_count",
    "clique_max",
    "var_sent",
    "var_received",
    "var_general",
    "weekends",
    "overtime",
)


@dataclass(frozen=True)
class FeatureConfig:
    overtime: bool = False
    overtime_unit: str = "days"
    closeness: str = "scaled"
    paths: str = "unweighted"
    cliques: str = "maximal"
    clique_budget: int = 10**7
    variability_default: float = 0.0
    pagerank_alpha: float = 0.85

    @property
    def feature_names(self) -> tuple[str, ...]:
        return FEATURES if self.overtime else FEATURES[:-1]


@dataclass(frozen=True, eq=False)
class FeatureTable:
    nodes: tuple[str, ...]
    names: tuple[str, ...]
    X: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.X.shape != (len(self.nodes), len(self.names)):
            raise ValueError(f"X has shape {self.X.shape}, expected {(len(self.nodes), len(self.names))}")
        if len(self.labels) != len(self.nodes):
            raise ValueError("one label per node required")
        if np.isnan(self.X).any():
            raise ValueError("feature table has missing cells")

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, FeatureTable):
            return NotImplemented
        return (self.nodes == other.nodes and self.names == other.names
                and np.array_equal(self.X, other.X) and np.array_equal(self.labels, other.labels))

    def column(self, name: str) -> np.ndarray:
        return self.X[:, self.names.index(name)]

    def select(self, names) -> "FeatureTable":
        names = tuple(names)
        idx = [self.names.index(n) for n in names]
        return FeatureTable(self.nodes, names, self.X[:, idx], self.labels)

    def with_labels(self, labels) -> "FeatureTable":
        return FeatureTable(self.nodes, self.names, self.X, np.asarray(labels))


def assemble(net: SocialNetwork, records, roster, config: FeatureConfig = FeatureConfig()) -> FeatureTable:
    """Compute every feature for every node of ``net``; labels come from ``roster``."""
    nodes = net.nodes
    if not nodes:
        raise ValueError("cannot build a feature table for an empty roster")
    hub, auth = centrality.hits(net)
    cl = cliques.clique_stats(net, config.cliques, config.clique_budget)
    cols = {
        "indegree": centrality.indegree(net),
        "outdegree": centrality.outdegree(net),
        "betweenness": centrality.betweenness(net, config.paths),
        "closeness": centrality.closeness(net, config.closeness, config.paths),
        "eigenvector": centrality.eigenvector(net),
        "pagerank": centrality.pagerank(net, config.pagerank_alpha),
        "hub": hub,
        "authority": auth,
        "clustering": centrality.clustering(net),
        "clique_count": {n: c for n, (c, _) in cl.items()},
        "clique_max": {n: m for n, (_, m) in cl.items()},
        "var_sent": behaviour.neighborhood_variability(records, nodes, "sent", config.variability_default),
        "var_received": behaviour.neighborhood_variability(records, nodes, "received", config.variability_default),
        "var_general": behaviour.neighborhood_variability(records, nodes, "general", config.variability_default),
        "weekends": behaviour.weekend_count(records, nodes),
    }
    if config.overtime:
        cols["overtime"] = behaviour.overtime_count(records, nodes, config.overtime_unit)
    names = config.feature_names
    X = np.array([[cols[f][n] for f in names] for n in nodes], dtype=float)
    labels = np.array([roster.level(n) for n in nodes], dtype=np.int64)
    return FeatureTable(tuple(nodes), names, X, labels)


def write_table(table: FeatureTable, path, delimiter: str = ";") -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(("id",) + table.names + ("level",))
        for node, row, lab in zip(table.nodes, table.X, table.labels):
            w.writerow([node] + [repr(float(v)) for v in row] + [int(lab)])
    return path


def read_table(path, delimiter: str = ";") -> FeatureTable:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    header, body = rows[0], rows[1:]
    if header[0] != "id" or header[-1] != "level":
        raise ValueError(f"{path}: header must start with 'id' and end with 'level'")
    names = tuple(header[1:-1])
    unknown = set(names) - set(FEATURES)
    if unknown:
        raise ValueError(f"{path}: unknown feature columns {sorted(unknown)}")
    nodes = tuple(r[0] for r in body)
    X = np.array([[float(v) for v in r[1:-1]] for r in body], dtype=float).reshape(len(body), len(names))
    labels = np.array([int(r[-1]) for r in body], dtype=np.int64)
    return FeatureTable(nodes, names, X, labels)
