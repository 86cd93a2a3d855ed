import pytest

from unicycle_esc.config import parse_config
from unicycle_esc.controller import EscParams
from unicycle_esc.field import FieldModel, SourceSchedule


@pytest.fixture
def quad_field():
    """f = 10 - (x-1)^2 / 2 - 3 (y-1)^2 / 2."""
    return FieldModel("quadratic", 10.0, SourceSchedule.fixed((1.0, 1.0)), shape=(1.0, 3.0))


@pytest.fixture
def sim_params():
    return EscParams(omega=120.0, c=0.3, Omega=3.0, lam=0.0105, h=1.0, a0=1.0)


@pytest.fixture
def sim_config():
    return parse_config("sim-known-field")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
