import pytest

from oracles import GridOracle


@pytest.fixture(scope="session")
def grid_oracles():
    cache = {}

    def get(m):
        if m not in cache:
            cache[m] = GridOracle(m)
        return cache[m]

    return get


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
