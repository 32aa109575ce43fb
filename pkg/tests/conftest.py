import random

import pytest
from hypothesis import HealthCheck, settings

from sealedbid.credentials import key_ceremony

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture(scope="session")
def ceremony():
    """A fixed (n=3, t=2) authority set shared by tests that only need a valid key."""
    return key_ceremony(3, 2, random.Random(2))


_CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Record one acceptance line and assert it; lines are repeated in the terminal summary."""

    def report(number: int, title: str, ok: bool, detail: str = ""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
        print(line)
        _CRITERIA.append(line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
