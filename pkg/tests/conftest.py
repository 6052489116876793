import math
import sys

import pytest

from qhjwave import assembly, potentials


@pytest.fixture(scope="session")
def osc():
    return potentials.harmonic()


@pytest.fixture(scope="session")
def hydrogen():
    return potentials.coulomb_radial(1.0, 1)


@pytest.fixture(scope="session")
def osc8(osc):
    """Harmonic n=8 run in the default gauge, oracle boundary data."""
    return assembly.solve_state(osc, n=8, boundary="oracle")


@pytest.fixture(scope="session")
def hydrogen3(hydrogen):
    """Coulomb n=3, l=1 run at phi=0.01, X(r1)=0."""
    return assembly.solve_state(hydrogen, n=3, phi=0.01)


@pytest.fixture(scope="session")
def hydrogen3_pi4(hydrogen):
    return assembly.solve_state(hydrogen, n=3, phi=math.pi / 4)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.report_lines():
        terminalreporter.write_line(line)
