import pytest

from gfm_htva import preset, run_simulation

STRATEGIES = ("tva", "vav", "htva")


@pytest.fixture(scope="session")
def runs():
    """Full-rate traces of the two reference scenarios, cached per session."""
    cache = {}

    def get(name, strategy):
        key = (name, strategy)
        if key not in cache:
            cache[key] = run_simulation(preset(name).with_strategy(strategy), keep_full=True)
        return cache[key]

    return get


_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion():
    """Record a one-line verdict for an acceptance criterion, then assert it."""

    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
