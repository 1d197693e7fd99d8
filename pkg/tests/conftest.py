import numpy as np
import pytest

from stmg.materials import ALUMINIUM_EPOXY, design_ramp, grid_with_design
from stmg.mesh import SpaceTimeGrid

# filled by test_acceptance, printed once at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


def uniform_grid(N_el=8, N_t=8, L=1.0, t_T=1.0, k=1.0, c=1.0):
    return SpaceTimeGrid(L, t_T, N_el, N_t, np.full(N_el, k), np.full(N_el, c))


@pytest.fixture
def small_uniform():
    return uniform_grid()


@pytest.fixture
def ramp16():
    """16x16 aluminium/epoxy ramp instance."""
    bare = SpaceTimeGrid(0.1, 10.0, 16, 16)
    chi = design_ramp(bare, 5.0 / bare.L, bare.L / 2)
    return bare, chi, grid_with_design(bare, chi, ALUMINIUM_EPOXY)
