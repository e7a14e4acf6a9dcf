import os
from datetime import datetime

import pytest
from hypothesis import HealthCheck, settings

from orghier.ingest import EmailRecord, Roster

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def rec(sender, recipient, when="2010-01-04T09:00"):
    return EmailRecord(str(sender), str(recipient), datetime.fromisoformat(when))


@pytest.fixture
def toy_roster():
    return Roster({"1": 1, "2": 2, "3": 3, "4": 3, "5": 3})


CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance verdict; all verdicts are repeated in the terminal summary."""
    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        CRITERIA.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA:
            terminalreporter.write_line(line)
