"""SIMP material interpolation and the analytic design fields used by the test problems."""

from __future__ import annotations

import csv
import dataclasses

import numpy as np

from stmg.mesh import SpaceTimeGrid


@dataclasses.dataclass(frozen=True)
class MaterialPair:
    """Insulator/conductor properties and the SIMP penalty exponents."""

    k_ins: float
    k_con: float
    c_ins: float
    c_con: float
    p_k: float = 3.0
    p_c: float = 2.0

    def __post_init__(self):
        if min(self.k_ins, self.k_con, self.c_ins, self.c_con) <= 0:
            raise ValueError("material properties must be positive")
        if self.p_k < 1 or self.p_c < 1:
            raise ValueError("penalty exponents must be >= 1")


# Aluminium conductor / epoxy insulator, three significant digits.
ALUMINIUM_EPOXY = MaterialPair(k_ins=1.97e-1, k_con=2.14e2, c_ins=1.67e6, c_con=2.41e6)


def check_design(chi) -> np.ndarray:
    chi = np.asarray(chi, dtype=np.float64)
    if np.any(chi < 0) or np.any(chi > 1) or np.any(np.isnan(chi)):
        raise ValueError("design field values must lie in [0, 1]")
    return chi


def simp_eval(chi, mat: MaterialPair):
    """Return ``(k, c)`` for scalar or array ``chi``."""
    chi = check_design(chi)
    k = mat.k_ins + (mat.k_con - mat.k_ins) * chi**mat.p_k
    c = mat.c_ins + (mat.c_con - mat.c_ins) * chi**mat.p_c
    return k, c


def simp_derivatives(chi, mat: MaterialPair):
    chi = check_design(chi)
    dk = mat.p_k * (mat.k_con - mat.k_ins) * chi ** (mat.p_k - 1)
    dc = mat.p_c * (mat.c_con - mat.c_ins) * chi ** (mat.p_c - 1)
    return dk, dc


def clamp01(v):
    return np.clip(v, 0.0, 1.0)


def design_ramp(grid: SpaceTimeGrid, alpha: float, x_offset: float) -> np.ndarray:
    """Conductor left of ``x_offset``, insulator right of it, linear ramp of width 1/alpha."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return clamp01(0.5 - alpha * (grid.element_centres() - x_offset))


def design_gap(grid: SpaceTimeGrid, F: float, inverted: bool = False) -> np.ndarray:
    """Two conducting regions separated by an insulating band (or the reverse)."""
    if not 0 < F < 1:
        raise ValueError("F must lie in (0, 1)")
    L = grid.L
    chi = clamp01(np.abs(grid.element_centres() - L / 2) / L * 2 / F - 1)
    return 1.0 - chi if inverted else chi


def grid_with_design(grid: SpaceTimeGrid, chi, mat: MaterialPair) -> SpaceTimeGrid:
    k, c = simp_eval(chi, mat)
    return grid.with_materials(k, c)


def write_design_csv(path, chi, columns=None):
    """Write one or more design fields as ``element, chi[, ...]`` columns.

    ``chi`` may be a single vector or a mapping of column name to vector.
    """
    if isinstance(chi, dict):
        names = list(chi)
        cols = [np.asarray(chi[n]) for n in names]
    else:
        names = columns or ["chi"]
        cols = [np.asarray(chi)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["element", *names])
        for e in range(len(cols[0])):
            w.writerow([e, *(repr(float(col[e])) for col in cols)])
