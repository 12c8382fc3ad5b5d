import contextlib

import pytest

CRITERIA: list[str] = []


@pytest.fixture
def criterion():
    """Context manager that records a PASS/FAIL line for an acceptance criterion."""

    @contextlib.contextmanager
    def check(number, label):
        try:
            yield
        except BaseException:
            line = f"FAIL criterion {number}: {label}"
            CRITERIA.append(line)
            print(line)
            raise
        line = f"PASS criterion {number}: {label}"
        CRITERIA.append(line)
        print(line)

    return check


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
