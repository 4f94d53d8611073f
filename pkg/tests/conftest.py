import pytest

from bsshift.model import ModelParams


@pytest.fixture
def params11():
    """Figure parameters: dE = 11 w, reference photon number 60."""
    return ModelParams(delta_e=11.0, hbar_omega0=1.0, coupling_u=0.0, n_ref=60.0)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
