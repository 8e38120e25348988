import numpy as np
import pytest

from poissonfraud.timeline import EventTimeline


@pytest.fixture
def toy_timeline():
    """Six genuine training transactions, then test labels [1, 0, 0]."""
    times = np.arange(9, dtype=float)
    labels = [0, 0, 0, 0, 0, 0, 1, 0, 0]
    return EventTimeline.from_events("toy", times, labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
