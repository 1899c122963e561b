import numpy as np
import pytest
from hypothesis import settings

from latbound import QuadGrid

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")



@pytest.fixture(scope="session")
def g256():
    return QuadGrid(1, 256)


@pytest.fixture(scope="session")
def g64():
    return QuadGrid(1, 64)


@pytest.fixture(scope="session")
def g32():
    return QuadGrid(1, 32)


@pytest.fixture(scope="session")
def g2d():
    return QuadGrid(2, 48)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion, then assert it."""

    def record(number, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
