"""Dataset descriptions, the ingest-to-features pipeline, and a synthetic organisation.

A dataset directory holds two files: the message log (``emails.csv``)
and the roster (``roster.csv``).  See README for the column layout.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from . import ingest
from .features.table import FeatureConfig, FeatureTable, assemble
from .graph import SocialNetwork, build_network

logger = logging.getLogger(__name__)

DATA_ENV = "ORGHIER_DATA"


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    emails: Path
    roster: Path
    format: str = "iso8601"
    delimiter: str = ";"
    overtime: bool = False
    activity: str = "sent"
    features: FeatureConfig = field(default_factory=FeatureConfig)

    def feature_config(self) -> FeatureConfig:
        return replace(self.features, overtime=self.overtime)


def data_root(explicit=None) -> Path:
    if explicit is not None:
        return Path(explicit)
    return Path(os.environ.get(DATA_ENV, "data"))


def preset(name: str, root=None) -> DatasetConfig:
    """Built-in dataset layouts: ``manufacturing`` (local ISO times, overtime on) and ``enron`` (epoch)."""
    base = data_root(root) / name
    if name == "manufacturing":
        return DatasetConfig(name, base / "emails.csv", base / "roster.csv", "iso8601", ";", overtime=True)
    if name == "enron":
        return DatasetConfig(name, base / "emails.csv", base / "roster.csv", "epoch", ";", overtime=False)
    raise ValueError(f"unknown dataset preset {name!r}; use a config file for other datasets")


@dataclass
class Dataset:
    config: DatasetConfig
    records: list
    roster: ingest.Roster
    report: ingest.FilterReport
    activity: ingest.ActivityIndex


@dataclass
class Prepared:
    """Everything downstream of one minimum-activity setting."""

    min_activity: int
    roster: ingest.Roster
    records: list
    network: SocialNetwork
    table: FeatureTable


def load_dataset(config: DatasetConfig) -> Dataset:
    if config.overtime and config.format != "iso8601":
        raise ValueError("overtime needs local ISO-8601 timestamps")
    for p in (config.emails, config.roster):
        if not Path(p).exists():
            raise ingest.IngestError(f"{config.name}: missing file {p}")
    roster = ingest.parse_roster(config.roster, config.delimiter)
    raw = ingest.parse_email_log(config.emails, config.format, config.delimiter)
    records, report = ingest.filter_records(raw, roster)
    activity = ingest.build_activity_index(records, config.activity)
    return Dataset(config, records, roster, report, activity)


def prepare(ds: Dataset, min_activity: int = 1, features: FeatureConfig | None = None) -> Prepared:
    """Drop inactive employees, rebuild the network from the survivors, compute features."""
    roster = ingest.apply_min_activity(ds.roster, ds.activity, min_activity)
    records, _ = ingest.filter_records(ds.records, roster)
    net = build_network(records, roster)
    table = assemble(net, records, roster, features or ds.config.feature_config())
    logger.info("%s min_activity=%d: %d employees %s", ds.config.name, min_activity, len(roster), roster.counts())
    return Prepared(min_activity, roster, records, net, table)


def synthetic_organization(n_first: int = 6, n_second: int = 8, n_regular: int = 60, months: int = 9,
                           seed: int = 0, noise: float = 0.3, start: datetime = datetime(2010, 1, 4)):
    """Generate a toy company as ``(records, roster)``.

    Regular staff sit in teams under a second-level manager, who reports to
    a first-level manager.  People mostly mail their own team and their
    boss; managers mail each other, broadcast to their teams, and work late
    and at weekends more often.  Some staff are silent in some months.
    ``noise`` in [0, 1] blurs the levels: it sets the share of regular staff
    who act as informal coordinators and the share of messages sent to
    random colleagues.
    """
    rng = np.random.default_rng(seed)
    ids = [str(i) for i in range(1, n_first + n_second + n_regular + 1)]
    first, second, regular = ids[:n_first], ids[n_first:n_first + n_second], ids[n_first + n_second:]
    level = {**{e: 1 for e in first}, **{e: 2 for e in second}, **{e: 3 for e in regular}}
    boss = {m: first[i % n_first] for i, m in enumerate(second)}
    team = {m: [] for m in second}
    for i, e in enumerate(regular):
        m = second[i % n_second]
        boss[e] = m
        team[m].append(e)
    reports = {f: [m for m in second if boss[m] == f] for f in first}
    hubs = set(rng.choice(regular, size=int(round(noise * len(regular) / 2)), replace=False).tolist())

    def contacts(e):
        lvl = level[e]
        if lvl == 1:
            return first + reports[e] + [r for m in reports[e] for r in team[m][:2]]
        if lvl == 2:
            return [boss[e]] + team[e] + second
        mates = team[boss[e]]
        if e in hubs:
            return [boss[e]] + mates + second + [r for m in second for r in team[m][:1]]
        return [boss[e]] + mates

    rate = {e: (30 if level[e] < 3 or e in hubs else 14) * rng.uniform(0.3, 1.7) for e in ids}
    late = {1: 0.25, 2: 0.2, 3: 0.12}
    weekend = {1: 0.08, 2: 0.06, 3: 0.03}
    records = []
    for month in range(months):
        month_start = start + timedelta(days=30 * month)
        for e in ids:
            if level[e] == 3 and rng.random() < 0.15:
                continue
            pool = [c for c in contacts(e) if c != e]
            n_msgs = rng.poisson(rate[e])
            for _ in range(n_msgs):
                if rng.random() < 0.05 + noise / 3:
                    to = ids[rng.integers(len(ids))]
                else:
                    to = pool[rng.integers(len(pool))]
                if to == e:
                    continue
                day = month_start + timedelta(days=int(rng.integers(0, 28)))
                if rng.random() < weekend[level[e]]:
                    day += timedelta(days=(5 - day.weekday()) % 7)
                elif day.weekday() >= 5:
                    day -= timedelta(days=day.weekday() - 4)
                hour = int(rng.integers(16, 22)) if rng.random() < late[level[e]] else int(rng.integers(7, 16))
                records.append(ingest.EmailRecord(e, to, day.replace(hour=hour, minute=int(rng.integers(60)))))
    records.sort(key=lambda r: (r.timestamp, ingest.node_sort_key(r.sender), ingest.node_sort_key(r.recipient)))
    return records, ingest.Roster(level)


def write_dataset(records, roster: ingest.Roster, directory, fmt: str = "iso8601") -> DatasetConfig:
    """Write ``emails.csv`` and ``roster.csv`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = ["sender;recipient;timestamp"]
    for r in records:
        stamp = r.timestamp.isoformat() if fmt == "iso8601" else str(int((r.timestamp - datetime(1970, 1, 1)).total_seconds()))
        lines.append(f"{r.sender};{r.recipient};{stamp}")
    (directory / "emails.csv").write_text("\n".join(lines) + "\n")
    (directory / "roster.csv").write_text(
        "id;level\n" + "".join(f"{e};{roster.level(e)}\n" for e in roster.ids))
    return DatasetConfig(directory.name, directory / "emails.csv", directory / "roster.csv", fmt, ";",
                         overtime=(fmt == "iso8601"))
