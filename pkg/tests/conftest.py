import pytest

from taperconv.dispersion import SyntheticDispersion

_LINES: list[str] = []


@pytest.fixture(scope="session")
def model():
    return SyntheticDispersion()


@pytest.fixture
def report():
    """Record one PASS/FAIL line; printed in the terminal summary."""

    def emit(name: str, passed: bool, detail: str):
        _LINES.append(f"{'PASS' if passed else 'FAIL'}  {name}: {detail}")
        return passed

    return emit


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
