from datetime import datetime, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import rec
from orghier.ingest import (
    EmailRecord,
    IngestError,
    Roster,
    apply_min_activity,
    build_activity_index,
    filter_records,
    parse_email_log,
    parse_roster,
    parse_timestamp,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_iso_line_maps_fields(tmp_path):
    p = write(tmp_path, "log.csv", "a;b;2010-01-04T09:12:00\n")
    assert parse_email_log(p) == [EmailRecord("a", "b", datetime(2010, 1, 4, 9, 12))]


def test_epoch_line_matches_iso_instant(tmp_path):
    p = write(tmp_path, "log.csv", "a;b;1262596320\n")
    (r,) = parse_email_log(p, format="epoch")
    assert r.timestamp == datetime(2010, 1, 4, 9, 12)


@given(st.integers(min_value=0, max_value=4_102_444_800))
def test_epoch_agrees_with_calendar_arithmetic(seconds):
    # independent route: days since 1970-01-01 through the proleptic ordinal
    days, rem = divmod(seconds, 86400)
    date = datetime.fromordinal(datetime(1970, 1, 1).toordinal() + days)
    expected = date.replace(hour=rem // 3600, minute=rem % 3600 // 60, second=rem % 60)
    assert parse_timestamp(str(seconds), "epoch") == expected


def test_iso_offsets_are_not_shifted():
    assert parse_timestamp("2010-01-04T23:30:00+05:00") == datetime(2010, 1, 4, 23, 30)


def test_empty_recipient_reports_line(tmp_path):
    p = write(tmp_path, "log.csv", "sender;recipient;timestamp\na;b;2010-01-04T09:12:00\na;;2010-01-04T09:12:00\n")
    with pytest.raises(IngestError, match=":3:"):
        parse_email_log(p)


def test_bad_timestamp_and_missing_field(tmp_path):
    with pytest.raises(IngestError, match=":1:.*timestamp"):
        parse_email_log(write(tmp_path, "a.csv", "a;b;yesterday\n"))
    with pytest.raises(IngestError, match=":1:"):
        parse_email_log(write(tmp_path, "b.csv", "a;b\n"))
    with pytest.raises(IngestError):
        parse_email_log(tmp_path / "missing.csv")


def test_custom_delimiter_and_order(tmp_path):
    p = write(tmp_path, "log.csv", "b,a,2010-02-01T00:00\na,b,2010-01-01T00:00\n")
    out = parse_email_log(p, delimiter=",")
    assert [(r.sender, r.recipient) for r in out] == [("b", "a"), ("a", "b")]


def test_roster_counts_and_errors(tmp_path):
    r = parse_roster(write(tmp_path, "r.csv", "id;level\n1;1\n2;2\n3;3\n4;3\n"))
    assert r.counts() == {1: 1, 2: 1, 3: 2}
    with pytest.raises(IngestError, match="'7'"):
        parse_roster(write(tmp_path, "bad.csv", "1;1\n7;4\n"))
    with pytest.raises(IngestError, match="duplicate"):
        parse_roster(write(tmp_path, "dup.csv", "1;1\n1;3\n"))


def test_filter_records_rules(toy_roster):
    records = [rec(1, 1), rec(1, "x"), rec(1, 2), rec("y", 2), rec(2, 1)]
    kept, report = filter_records(records, toy_roster)
    assert kept == [records[2], records[4]]
    assert (report.kept, report.off_roster, report.self_loops) == (2, 2, 1)


ids = st.sampled_from(["1", "2", "3", "4", "5", "x"])
record_lists = st.lists(st.builds(lambda s, r, d: rec(s, r, f"2010-{d:02d}-05T10:00"), ids, ids,
                                  st.integers(1, 12)), max_size=30)


@given(record_lists)
def test_filter_is_idempotent(records):
    roster = Roster({"1": 1, "2": 2, "3": 3, "4": 3, "5": 3})
    once, _ = filter_records(records, roster)
    twice, report = filter_records(once, roster)
    assert twice == once and report.off_roster == report.self_loops == 0


def test_activity_months():
    records = [rec(1, 2, "2010-01-05T10:00"), rec(1, 3, "2010-01-20T10:00"), rec(2, 1, "2010-01-02T10:00"),
               rec(2, 1, "2010-03-02T10:00")]
    idx = build_activity_index(records)
    assert idx.active_months("1") == ((2010, 1),)
    assert idx.active_months("2") == ((2010, 1), (2010, 3)) and idx.n_active("2") == 2
    assert idx.n_active("3") == 0
    assert build_activity_index(records, "any").n_active("3") == 1


def test_min_activity_toy(toy_roster):
    # 1 and 2 send in two months; 3 in one; 4 and 5 never send
    records = [rec(1, 2, "2010-01-05T10:00"), rec(1, 2, "2010-02-05T10:00"), rec(2, 3, "2010-01-05T10:00"),
               rec(2, 3, "2010-04-05T10:00"), rec(3, 4, "2010-04-05T10:00")]
    idx = build_activity_index(records)
    assert apply_min_activity(toy_roster, idx, 1).ids == ["1", "2", "3"]
    assert apply_min_activity(toy_roster, idx, 2).ids == ["1", "2"]
    with pytest.raises(IngestError):
        apply_min_activity(toy_roster, idx, 3)


@given(record_lists, st.integers(1, 4))
def test_min_activity_monotone(records, k):
    roster = Roster({"1": 1, "2": 2, "3": 3, "4": 3, "5": 3})
    kept, _ = filter_records(records, roster)
    idx = build_activity_index(kept)
    for emp in idx.months:
        assert any(r.sender == emp for r in kept)

    def survivors(m):
        try:
            return set(apply_min_activity(roster, idx, m).ids)
        except IngestError:
            return set()

    assert survivors(k + 1) <= survivors(k) <= set(roster.ids)


def test_epoch_uses_utc_not_local():
    stamp = 1262596320
    assert parse_timestamp(str(stamp), "epoch") == datetime.fromtimestamp(stamp, timezone.utc).replace(tzinfo=None)
