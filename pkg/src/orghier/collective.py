"""Collective classification: propagate revealed hierarchy labels over the mail graph.

A share of each class is revealed (the nodes ranking highest on a chosen
utility feature).  Each round, every labelled node sends its label to each
unlabelled neighbour (edges taken as undirected).  An unlabelled node takes
the label it received most often, with the majority class's count divided
by ``threshold``.  Tied nodes wait; after more than ``u_max`` tied rounds
they take the highest-ranked tied label.  Updates are applied only after
all messages of a round are counted, so visiting order is irrelevant.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .features.table import FEATURES, FeatureTable
from .graph import SocialNetwork, undirected_projection
from .learn.metrics import flatten_labels, macro_f1

THRESHOLDS = tuple(range(1, 11))
JACCARD_VALUES = (0.7, 0.8, 0.9, 0.99)
KNOWN_FRACTIONS = (0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1)


@dataclass(frozen=True)
class CCParams:
    utility_feature: str = "indegree"
    known_fraction: float = 0.5
    threshold: int = 1
    jaccard_min: float = 0.7
    max_iterations: int = 100
    u_max: int = 2
    levels: int = 2
    counters: str = "reset"

    def __post_init__(self):
        if self.utility_feature not in FEATURES:
            raise ValueError(f"unknown utility feature {self.utility_feature!r}")
        if not 0 < self.known_fraction <= 1:
            raise ValueError("known_fraction must lie in (0, 1]")
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.u_max < 0:
            raise ValueError("u_max must be >= 0")
        if self.levels not in (2, 3):
            raise ValueError("levels must be 2 or 3")
        if self.counters not in ("reset", "cumulative"):
            raise ValueError("counters must be 'reset' or 'cumulative'")


@dataclass
class CCState:
    """Label codes per node (0 = unlabelled, else 1 + class index)."""

    classes: np.ndarray
    labels: np.ndarray
    seeds: np.ndarray
    counts: np.ndarray
    ties: np.ndarray
    majority: int
    iteration: int = 0

    @property
    def labeled(self) -> np.ndarray:
        return self.labels > 0

    def pairs(self) -> set[tuple[int, int]]:
        return {(int(i), int(self.labels[i])) for i in np.flatnonzero(self.labels)}

    def copy(self) -> "CCState":
        return CCState(self.classes, self.labels.copy(), self.seeds.copy(), self.counts.copy(),
                       self.ties.copy(), self.majority, self.iteration)


@dataclass
class CCResult:
    nodes: tuple[str, ...]
    labels: np.ndarray
    truth: np.ndarray
    seeds: np.ndarray
    iterations: int
    converged: bool
    fallback: np.ndarray
    transcript: list[tuple[int, int, float]] = field(default_factory=list)

    def as_dict(self) -> dict[str, int]:
        return {n: int(l) for n, l in zip(self.nodes, self.labels)}


def n_revealed(class_size: int, fraction: float) -> int:
    return min(class_size, math.ceil(Fraction(repr(fraction)) * class_size))


def seed_known(table: FeatureTable, params: CCParams) -> CCState:
    """Reveal the top ``ceil(fraction * size)`` nodes of each true class by utility.

    Equal utilities are broken by node order (ascending id).
    """
    truth = flatten_labels(table.labels, params.levels)
    if params.utility_feature not in table.names:
        raise ValueError(f"utility feature {params.utility_feature!r} is not in the table")
    utility = table.column(params.utility_feature)
    classes = np.unique(truth)
    labels = np.zeros(len(truth), dtype=np.int64)
    for ci, cls in enumerate(classes):
        members = np.flatnonzero(truth == cls)
        if len(members) == 0:
            raise ValueError(f"class {cls} is empty")
        # stable sort on -utility keeps ascending node order among ties
        ranked = members[np.argsort(-utility[members], kind="stable")]
        labels[ranked[: n_revealed(len(members), params.known_fraction)]] = ci + 1
    seed_counts = np.bincount(labels[labels > 0] - 1, minlength=len(classes))
    # most revealed members; ties go to the lower hierarchy level
    majority = int(len(classes) - 1 - np.argmax(seed_counts[::-1]))
    return CCState(
        classes=classes, labels=labels, seeds=labels > 0,
        counts=np.zeros((len(truth), len(classes)), dtype=np.int64),
        ties=np.zeros(len(truth), dtype=np.int64), majority=majority,
    )


def iterate(state: CCState, adjacency: np.ndarray, params: CCParams) -> CCState:
    """One synchronous round of message passing and label update."""
    new = state.copy()
    new.iteration += 1
    k = len(state.classes)
    labeled = state.labels > 0
    unlabeled = ~labeled
    onehot = np.zeros((len(state.labels), k), dtype=np.int64)
    onehot[np.flatnonzero(labeled), state.labels[labeled] - 1] = 1
    received = adjacency.T @ onehot
    received[labeled] = 0
    if params.counters == "cumulative":
        new.counts = state.counts + received
    else:
        new.counts = received
    new.counts[labeled] = 0

    # c_majority / threshold compared exactly: scale every other class by threshold
    scale = np.full(k, params.threshold, dtype=np.int64)
    scale[state.majority] = 1
    effective = new.counts * scale
    for i in np.flatnonzero(unlabeled & (new.counts.sum(axis=1) > 0)):
        best = effective[i].max()
        tied = np.flatnonzero(effective[i] == best)
        if len(tied) == 1:
            new.labels[i] = tied[0] + 1
            new.ties[i] = 0
            continue
        new.ties[i] += 1
        if new.ties[i] > params.u_max:
            new.labels[i] = tied.min() + 1
            new.ties[i] = 0
    return new


def jaccard_pairs(a: set, b: set) -> float:
    union = a | b
    return len(a & b) / len(union) if union else 1.0


def run(table: FeatureTable, net: SocialNetwork, params: CCParams) -> CCResult:
    """Seed, iterate until the stop rule holds or ``max_iterations`` rounds ran.

    The rule: every node labelled and the Jaccard similarity of consecutive
    ``(node, label)`` sets above ``jaccard_min``.  Nodes still unlabelled at
    the end (unreachable from any seed) get the majority class.
    """
    if tuple(net.nodes) != tuple(table.nodes):
        raise ValueError("table and network must list the same nodes in the same order")
    adjacency = undirected_projection(net).adjacency
    state = seed_known(table, params)
    truth = flatten_labels(table.labels, params.levels)
    transcript = []
    converged = False
    while state.iteration < params.max_iterations:
        before = state.pairs()
        state = iterate(state, adjacency, params)
        j = jaccard_pairs(before, state.pairs())
        transcript.append((state.iteration, int(state.labeled.sum()), j))
        if j > params.jaccard_min and state.labeled.all():
            converged = True
            break
    fallback = ~state.labeled
    codes = np.where(state.labeled, state.labels - 1, state.majority)
    return CCResult(
        nodes=tuple(table.nodes), labels=state.classes[codes], truth=truth, seeds=state.seeds,
        iterations=state.iteration, converged=converged, fallback=fallback, transcript=transcript,
    )


def evaluate_cc(result: CCResult, truth=None, scope: str = "unknown_only") -> float:
    """Macro-F1 over the initially unlabelled nodes (default) or over all nodes."""
    truth = result.truth if truth is None else np.asarray(truth)
    if scope == "all":
        mask = np.ones(len(truth), dtype=bool)
    elif scope == "unknown_only":
        mask = ~result.seeds
    else:
        raise ValueError("scope must be 'unknown_only' or 'all'")
    if not mask.any():
        return 1.0
    return macro_f1(truth[mask], result.labels[mask])


def write_transcript(result: CCResult, path, delimiter: str = ";") -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(("iteration", "labeled", "jaccard"))
        for it, n, j in result.transcript:
            w.writerow((it, n, f"{j:.10g}"))
    return path
