"""Message-log and roster ingestion.

Input files are delimited text (``;`` by default).  A message log has the
columns ``sender``, ``recipient``, ``timestamp``; a roster has ``id`` and
``level``.  A header line is optional and recognised by its column names.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping

logger = logging.getLogger(__name__)

LEVELS = (1, 2, 3)

_LOG_HEADER_NAMES = {
    "sender", "from", "source", "recipient", "to", "target",
    "timestamp", "eventdate", "date", "time", "datetime",
}
_ROSTER_HEADER_NAMES = {"id", "employee", "employee_id", "level", "hierarchy", "position"}


class IngestError(ValueError):
    """Raised for unreadable or malformed input files."""


@dataclass(frozen=True, order=True)
class EmailRecord:
    sender: str
    recipient: str
    timestamp: datetime


@dataclass(frozen=True)
class Roster:
    """Mapping employee-id -> hierarchy level (1, 2 or 3)."""

    entries: Mapping[str, int]

    def __post_init__(self):
        bad = {k: v for k, v in self.entries.items() if v not in LEVELS}
        if bad:
            emp, lvl = next(iter(sorted(bad.items())))
            raise IngestError(f"employee {emp!r} has level {lvl!r}; expected one of {LEVELS}")

    def __contains__(self, emp):
        return emp in self.entries

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.ids)

    @property
    def ids(self) -> list[str]:
        return sorted(self.entries, key=node_sort_key)

    def level(self, emp: str) -> int:
        return self.entries[emp]

    def counts(self) -> dict[int, int]:
        c = Counter(self.entries.values())
        return {lvl: c.get(lvl, 0) for lvl in LEVELS}

    def restrict(self, keep: Iterable[str]) -> "Roster":
        keep = set(keep)
        return Roster({k: v for k, v in self.entries.items() if k in keep})


@dataclass(frozen=True)
class FilterReport:
    kept: int
    off_roster: int
    self_loops: int


@dataclass(frozen=True)
class ActivityIndex:
    """Per employee, the sorted calendar months ``(year, month)`` with activity."""

    months: Mapping[str, tuple[tuple[int, int], ...]] = field(default_factory=dict)

    def active_months(self, emp: str) -> tuple[tuple[int, int], ...]:
        return self.months.get(emp, ())

    def n_active(self, emp: str) -> int:
        return len(self.months.get(emp, ()))

    def histogram(self) -> dict[int, int]:
        """Number of employees per count of active months."""
        return dict(sorted(Counter(len(m) for m in self.months.values()).items()))


def node_sort_key(node: str):
    """Numeric ids sort numerically, everything else lexically after them."""
    try:
        return (0, int(node), node)
    except ValueError:
        return (1, 0, node)


def parse_timestamp(text: str, fmt: str = "iso8601") -> datetime:
    """Parse one timestamp field.

    ``iso8601`` values are taken at face value (no timezone shifting);
    ``epoch`` values are POSIX seconds interpreted as UTC and returned naive.
    """
    text = text.strip()
    if fmt == "iso8601":
        ts = datetime.fromisoformat(text)
        if ts.tzinfo is not None:
            ts = ts.replace(tzinfo=None)
        return ts
    if fmt == "epoch":
        seconds = float(text)
        return datetime.fromtimestamp(seconds, tz=timezone.utc).replace(tzinfo=None)
    raise ValueError(f"unknown timestamp format {fmt!r}")


def _split(line: str, delimiter: str) -> list[str]:
    return [f.strip() for f in line.rstrip("\r\n").split(delimiter)]


def _read_lines(path) -> list[str]:
    try:
        return Path(path).read_text(encoding="utf-8-sig").splitlines()
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc


def parse_email_log(path, format: str = "iso8601", delimiter: str = ";") -> list[EmailRecord]:
    """Read a message log; malformed lines raise :class:`IngestError` with the line number."""
    if format not in ("iso8601", "epoch"):
        raise IngestError(f"unknown timestamp format {format!r}")
    records = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        fields = _split(line, delimiter)
        if lineno == 1 and {f.lower() for f in fields} <= _LOG_HEADER_NAMES:
            continue
        if len(fields) < 3:
            raise IngestError(f"{path}:{lineno}: expected 3 fields, got {len(fields)}")
        sender, recipient, stamp = fields[:3]
        if not sender or not recipient:
            raise IngestError(f"{path}:{lineno}: empty sender or recipient")
        try:
            ts = parse_timestamp(stamp, format)
        except (ValueError, OverflowError, OSError) as exc:
            raise IngestError(f"{path}:{lineno}: bad timestamp {stamp!r} ({exc})") from exc
        records.append(EmailRecord(sender, recipient, ts))
    return records


def parse_roster(path, delimiter: str = ";") -> Roster:
    entries: dict[str, int] = {}
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        fields = _split(line, delimiter)
        if lineno == 1 and {f.lower() for f in fields} <= _ROSTER_HEADER_NAMES:
            continue
        if len(fields) < 2 or not fields[0]:
            raise IngestError(f"{path}:{lineno}: expected 'id{delimiter}level'")
        emp, raw = fields[0], fields[1]
        try:
            level = int(raw)
        except ValueError:
            raise IngestError(f"{path}:{lineno}: employee {emp!r} has non-integer level {raw!r}") from None
        if level not in LEVELS:
            raise IngestError(f"{path}:{lineno}: employee {emp!r} has level {level}; expected one of {LEVELS}")
        if emp in entries:
            raise IngestError(f"{path}:{lineno}: duplicate employee id {emp!r}")
        entries[emp] = level
    roster = Roster(entries)
    logger.info("roster %s: %s", path, roster.counts())
    return roster


def filter_records(records: Iterable[EmailRecord], roster) -> tuple[list[EmailRecord], FilterReport]:
    """Keep records between two distinct roster members, preserving order."""
    kept, off_roster, loops = [], 0, 0
    for rec in records:
        if rec.sender not in roster or rec.recipient not in roster:
            off_roster += 1
        elif rec.sender == rec.recipient:
            loops += 1
        else:
            kept.append(rec)
    report = FilterReport(kept=len(kept), off_roster=off_roster, self_loops=loops)
    logger.info("filter: kept %d, dropped %d off-roster, %d self-loops", len(kept), off_roster, loops)
    return kept, report


def build_activity_index(records: Iterable[EmailRecord], activity: str = "sent") -> ActivityIndex:
    """Months in which each employee sent (``activity="sent"``) or sent/received (``"any"``) mail."""
    if activity not in ("sent", "any"):
        raise ValueError(f"activity must be 'sent' or 'any', not {activity!r}")
    months: dict[str, set] = {}
    for rec in records:
        ym = (rec.timestamp.year, rec.timestamp.month)
        months.setdefault(rec.sender, set()).add(ym)
        if activity == "any":
            months.setdefault(rec.recipient, set()).add(ym)
    return ActivityIndex({emp: tuple(sorted(m)) for emp, m in sorted(months.items())})


def apply_min_activity(roster: Roster, activity: ActivityIndex, min_months: int) -> Roster:
    if min_months < 1:
        raise ValueError("min_months must be >= 1")
    out = roster.restrict(e for e in roster.entries if activity.n_active(e) >= min_months)
    if not len(out):
        raise IngestError(f"no employee is active in >= {min_months} months")
    return out
