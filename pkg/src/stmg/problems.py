"""Named test-problem presets 0-9.

Problems 0-6 are nondimensional (L = 1, conductor k = c = 1). Problems 7-9
use the aluminium/epoxy pair on a 0.1 m rod.
"""

from __future__ import annotations

import dataclasses
from typing import Callable

import numpy as np

from stmg.materials import (
    ALUMINIUM_EPOXY,
    MaterialPair,
    design_gap,
    design_ramp,
    grid_with_design,
)
from stmg.mesh import SpaceTimeGrid, build_fine_grid


@dataclasses.dataclass(frozen=True)
class Problem:
    number: int
    L: float
    t_T: float
    mat: MaterialPair
    design: Callable[[SpaceTimeGrid], np.ndarray]
    t_T_range: tuple[float, float] | None = None  # inclusive sweep bounds for t_T

    def build(self, N_el: int = 256, N_t: int = 256, t_T: float | None = None, **design_kw):
        """Return ``(grid, chi)`` with SIMP materials filled in."""
        bare = SpaceTimeGrid(self.L, self.t_T if t_T is None else t_T, N_el, N_t)
        chi = self.design(bare, **design_kw)
        grid = grid_with_design(bare, chi, self.mat)
        return build_fine_grid(grid.L, grid.t_T, N_el, N_t, grid.k, grid.c), chi


def _ramp(alpha_L: float, offset_L: float):
    def design(g: SpaceTimeGrid):
        return design_ramp(g, alpha_L / g.L, offset_L * g.L)

    return design


def _gap(inverted: bool):
    def design(g: SpaceTimeGrid, F: float = 0.03):
        return design_gap(g, F, inverted)

    return design


def _nondim(k_ins: float, c_ins: float) -> MaterialPair:
    return MaterialPair(k_ins=k_ins, k_con=1.0, c_ins=c_ins, c_con=1.0)


UNIFORM = MaterialPair(1.0, 1.0, 1.0, 1.0)

PROBLEMS = {
    # uniform k = c = 1; t_T from 2^-18 to 2^2 sweeps lambda over 2^-10..2^10 at 256x256
    0: Problem(0, 1.0, 2.0**-8, UNIFORM, lambda g: np.ones(g.N_el), (2.0**-18, 2.0**2)),
    # ramp designs, alpha = 10, varying contrast and conductor fraction
    1: Problem(1, 1.0, 2.0**-6, _nondim(1e-2, 1.0), _ramp(10.0, 0.5), (2.0**-10, 2.0**-2)),
    2: Problem(2, 1.0, 2.0**-3, _nondim(1e-4, 1.0), _ramp(10.0, 0.5), (2.0**-7, 2.0**1)),
    3: Problem(3, 1.0, 2.0**-3, _nondim(1e-4, 1.0), _ramp(10.0, 0.15), (2.0**-7, 2.0**1)),
    4: Problem(4, 1.0, 2.0**-3, _nondim(1e-4, 1.0), _ramp(10.0, 0.85), (2.0**-7, 2.0**1)),
    5: Problem(5, 1.0, 2.0**-16, _nondim(1.0, 1e-4), _ramp(10.0, 0.5), (2.0**-20, 2.0**-12)),
    6: Problem(6, 1.0, 2.0**-8, _nondim(1e-4, 1e-4), _ramp(10.0, 0.5), (2.0**-12, 2.0**-4)),
    # aluminium/epoxy: smooth ramp, insulating gap, conducting gap
    7: Problem(7, 0.1, 10.0, ALUMINIUM_EPOXY, _ramp(5.0, 0.5)),
    8: Problem(8, 0.1, 100.0, ALUMINIUM_EPOXY, _gap(False)),
    9: Problem(9, 0.1, 100.0, ALUMINIUM_EPOXY, _gap(True)),
}


def get_problem(number: int) -> Problem:
    try:
        return PROBLEMS[int(number)]
    except KeyError:
        raise ValueError(f"unknown problem preset {number!r}; expected 0-9") from None


def sweep_t_T(problem: Problem, step_log2: float = 0.25) -> np.ndarray:
    """Powers of 2^step covering the preset's t_T range, both ends included."""
    lo, hi = problem.t_T_range
    a, b = np.log2(lo), np.log2(hi)
    n = int(round((b - a) / step_log2))
    return 2.0 ** (a + step_log2 * np.arange(n + 1))
