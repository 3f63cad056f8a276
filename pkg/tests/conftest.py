import pytest

from aitlab.grids import Curve


@pytest.fixture
def bsm_curves():
    return Curve.constant(0.08), Curve.constant(0.02), Curve.constant(0.2)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
