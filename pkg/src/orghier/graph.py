"""Directed weighted communication network and its undirected projections."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .ingest import EmailRecord, node_sort_key


@dataclass(frozen=True, eq=False)
class SocialNetwork:
    """Directed graph with edge weight ``w_ij = count_ij / sent_i``.

    Nodes are every roster member, including those who never send; such
    nodes simply have no out-edges.
    """

    nodes: tuple[str, ...]
    raw_counts: Mapping[tuple[str, str], int]
    out_totals: Mapping[str, int]

    @cached_property
    def index(self) -> dict[str, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    @cached_property
    def edges(self) -> dict[tuple[str, str], float]:
        return {(i, j): c / self.out_totals[i] for (i, j), c in self.raw_counts.items()}

    def __len__(self):
        return len(self.nodes)

    def successors(self, node: str) -> list[str]:
        return [self.nodes[k] for k in np.flatnonzero(self.binary_adjacency[self.index[node]])]

    @cached_property
    def weighted_adjacency(self) -> np.ndarray:
        """Dense matrix ``A[i, j] = w_ij`` in node order."""
        n = len(self.nodes)
        a = np.zeros((n, n))
        for (i, j), w in self.edges.items():
            a[self.index[i], self.index[j]] = w
        a.setflags(write=False)
        return a

    @cached_property
    def binary_adjacency(self) -> np.ndarray:
        a = (self.weighted_adjacency > 0).astype(np.int64)
        a.setflags(write=False)
        return a

    def edge_list(self) -> list[tuple[str, str, float, int]]:
        idx = self.index
        keys = sorted(self.raw_counts, key=lambda e: (idx[e[0]], idx[e[1]]))
        return [(i, j, self.edges[(i, j)], self.raw_counts[(i, j)]) for i, j in keys]


@dataclass(frozen=True, eq=False)
class Projection:
    """Symmetric simple graph over the same node order as its source network."""

    nodes: tuple[str, ...]
    adjacency: np.ndarray

    @property
    def edges(self) -> set[frozenset]:
        ii, jj = np.nonzero(np.triu(self.adjacency, 1))
        return {frozenset((self.nodes[i], self.nodes[j])) for i, j in zip(ii, jj)}

    def neighbors(self) -> list[set[int]]:
        return [set(np.flatnonzero(row).tolist()) for row in self.adjacency]


def build_network(records: Iterable[EmailRecord], roster) -> SocialNetwork:
    """Aggregate filtered records into a :class:`SocialNetwork` over ``roster``."""
    nodes = tuple(sorted(roster, key=node_sort_key))
    members = set(nodes)
    counts: Counter = Counter()
    for rec in records:
        if rec.sender == rec.recipient:
            raise ValueError(f"self-loop {rec.sender!r}; filter records first")
        if rec.sender not in members or rec.recipient not in members:
            raise ValueError(f"record {rec.sender!r}->{rec.recipient!r} is off-roster; filter records first")
        counts[(rec.sender, rec.recipient)] += 1
    totals: Counter = Counter()
    for (i, _), c in counts.items():
        totals[i] += c
    return SocialNetwork(
        nodes=nodes,
        raw_counts=dict(sorted(counts.items())),
        out_totals={n: totals.get(n, 0) for n in nodes},
    )


def undirected_projection(net: SocialNetwork) -> Projection:
    a = net.binary_adjacency
    und = ((a + a.T) > 0).astype(np.int64)
    np.fill_diagonal(und, 0)
    return Projection(net.nodes, und)


def reciprocal_projection(net: SocialNetwork) -> Projection:
    a = net.binary_adjacency
    rec = (a * a.T).astype(np.int64)
    np.fill_diagonal(rec, 0)
    return Projection(net.nodes, rec)


def write_edge_list(net: SocialNetwork, path) -> Path:
    """Write ``i j w_ij count_ij`` lines, one per edge."""
    path = Path(path)
    lines = [f"{i} {j} {w:.12g} {c}" for i, j, w, c in net.edge_list()]
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return path
