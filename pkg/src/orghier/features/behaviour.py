"""Features taken from message timing rather than graph structure."""

from __future__ import annotations

from collections import defaultdict
from datetime import time
from typing import Iterable

from ..ingest import EmailRecord, node_sort_key

OVERTIME_START = time(16, 0)
OVERTIME_END = time(6, 0)


def _ordered(nodes) -> list[str]:
    return sorted(nodes, key=node_sort_key)


def jaccard(a: set, b: set) -> float:
    union = a | b
    if not union:
        return 1.0
    return len(a & b) / len(union)


def monthly_neighbors(records: Iterable[EmailRecord], mode: str) -> dict[str, dict[tuple[int, int], set]]:
    """node -> month -> set of contacts in the chosen direction."""
    if mode not in ("sent", "received", "general"):
        raise ValueError(f"mode must be sent, received or general, not {mode!r}")
    out: dict = defaultdict(lambda: defaultdict(set))
    for rec in records:
        ym = (rec.timestamp.year, rec.timestamp.month)
        if mode in ("sent", "general"):
            out[rec.sender][ym].add(rec.recipient)
        if mode in ("received", "general"):
            out[rec.recipient][ym].add(rec.sender)
    return out


def neighborhood_variability(records, roster, mode: str = "sent", default: float = 0.0) -> dict[str, float]:
    """Mean Jaccard similarity of a node's contact sets in consecutive active months.

    Months without contact in the chosen direction are skipped, so January
    is compared with March when February is silent.  Nodes with fewer than
    two active months get ``default``.
    """
    per_node = monthly_neighbors(records, mode)
    out = {}
    for node in _ordered(roster):
        months = per_node.get(node, {})
        seq = [months[m] for m in sorted(months)]
        if len(seq) < 2:
            out[node] = default
            continue
        scores = [jaccard(a, b) for a, b in zip(seq, seq[1:])]
        out[node] = sum(scores) / len(scores)
    return out


def weekend_count(records: Iterable[EmailRecord], roster) -> dict[str, int]:
    """Distinct Saturdays and Sundays on which each node sent at least one message."""
    days = defaultdict(set)
    for rec in records:
        if rec.timestamp.weekday() >= 5:
            days[rec.sender].add(rec.timestamp.date())
    return {n: len(days.get(n, ())) for n in _ordered(roster)}


def is_overtime(stamp) -> bool:
    t = stamp.time()
    return t >= OVERTIME_START or t < OVERTIME_END


def overtime_count(records: Iterable[EmailRecord], roster, unit: str = "days") -> dict[str, int]:
    """Overtime activity per node: sends at local time in ``[16:00, 06:00)``.

    ``unit="days"`` counts distinct calendar dates with such a message,
    ``unit="messages"`` counts the messages themselves.
    """
    if unit not in ("days", "messages"):
        raise ValueError(f"unit must be 'days' or 'messages', not {unit!r}")
    hits = defaultdict(list)
    for rec in records:
        if is_overtime(rec.timestamp):
            hits[rec.sender].append(rec.timestamp.date())
    if unit == "days":
        return {n: len(set(hits.get(n, ()))) for n in _ordered(roster)}
    return {n: len(hits.get(n, ())) for n in _ordered(roster)}
