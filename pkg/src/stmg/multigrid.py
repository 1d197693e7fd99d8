"""Damped-Jacobi V-cycles on a hierarchy of space-time levels."""

from __future__ import annotations

import dataclasses
import enum
import math
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from stmg.assembly import AssembledSystem, assemble_system
from stmg.materials import MaterialPair
from stmg.mesh import SpaceTimeGrid, coarsen_grid
from stmg.rediscretisation import (
    RediscretisationMethod,
    coarse_system,
    coarsen_materials,
)
from stmg.strategy import CoarseningPath
from stmg.transfer import TransferPair, build_transfer


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    omega: float = 0.5
    nu: int = 5
    tol_converge: float = 1e-9
    tol_diverge: float = 1e9
    max_cycles: int = 100

    def __post_init__(self):
        if not 0 < self.omega <= 1:
            raise ValueError("omega must lie in (0, 1]")
        if self.nu < 0:
            raise ValueError("nu must be non-negative")


class Termination(enum.Enum):
    Converged = "converged"
    Diverged = "diverged"
    MaxCycles = "max_cycles"


@dataclasses.dataclass
class SolveReport:
    residual_history: list[float]
    cause: Termination
    absolute: bool = False  # residual not normalised because b == 0

    @property
    def cycles(self) -> int:
        return len(self.residual_history) - 1

    @property
    def convergence_factor(self) -> float:
        if self.cycles == 0:
            return float("nan")
        return convergence_factor(self.residual_history)

    def csv_rows(self):
        return [(n, r) for n, r in enumerate(self.residual_history)]


def convergence_factor(history) -> float:
    """Geometric-mean residual reduction per cycle, (r_N / r_0)^(1/N)."""
    if len(history) < 2:
        raise ValueError("need at least one completed cycle")
    n = len(history) - 1
    r0, rn = history[0], history[-1]
    if r0 == 0:
        return 0.0
    if not math.isfinite(rn):
        return math.inf
    return (rn / r0) ** (1.0 / n)


@dataclasses.dataclass
class Level:
    grid: SpaceTimeGrid
    system: AssembledSystem
    chi: np.ndarray | None = None

    @property
    def J(self) -> sp.csr_matrix:
        return self.system.J

    @cached_property
    def inv_diag(self) -> np.ndarray:
        d = self.J.diagonal()
        if np.any(d == 0):
            raise ZeroDivisionError("system matrix has a zero diagonal entry")
        return 1.0 / d


@dataclasses.dataclass
class LevelHierarchy:
    """Levels ordered finest first; ``transfers[l]`` connects levels l and l+1."""

    levels: list[Level]
    transfers: list[TransferPair]
    path: CoarseningPath
    method: RediscretisationMethod | None = None

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def fine(self) -> Level:
        return self.levels[0]

    @cached_property
    def coarse_lu(self):
        return spla.splu(self.levels[-1].J.tocsc())

    def transposed(self) -> "LevelHierarchy":
        """Same transfers, every level matrix transposed (for adjoint solves)."""
        levels = [
            Level(lv.grid, lv.system.transposed(), lv.chi) for lv in self.levels
        ]
        return LevelHierarchy(levels, self.transfers, self.path, self.method)


def build_transfers(fine: SpaceTimeGrid, path: CoarseningPath, interp) -> list[TransferPair]:
    out, g = [], fine
    for d in path.directions:
        c = coarsen_grid(g, d)
        out.append(build_transfer(g, c, d, interp))
        g = c
    return out


def build_hierarchy(
    fine: SpaceTimeGrid,
    method: RediscretisationMethod,
    path: CoarseningPath,
    chi: np.ndarray | None = None,
    mat: MaterialPair | None = None,
    transfers: list[TransferPair] | None = None,
    q: np.ndarray | None = None,
) -> LevelHierarchy:
    """Assemble every level along ``path``. Pass ``transfers`` to reuse operators."""
    if transfers is None:
        transfers = build_transfers(fine, path, method.interp)
    if len(transfers) != len(path):
        raise ValueError("one transfer pair per coarsening step is required")
    levels = [Level(fine, assemble_system(fine, q), chi)]
    for d, pair in zip(path.directions, transfers):
        prev = levels[-1]
        k, c, chi_c = coarsen_materials(prev.grid, d, method.reassembly, prev.chi, mat)
        grid = coarsen_grid(prev.grid, d).with_materials(k, c)
        levels.append(Level(grid, coarse_system(prev.system, pair, grid, method.reassembly), chi_c))
    return LevelHierarchy(levels, transfers, path, method)


def direct_solve(J: sp.spmatrix, b: np.ndarray) -> np.ndarray:
    if J.shape[0] != J.shape[1]:
        raise ValueError("matrix must be square")
    try:
        return spla.splu(sp.csc_matrix(J)).solve(np.asarray(b, dtype=np.float64))
    except RuntimeError as err:
        raise np.linalg.LinAlgError(str(err)) from err


def jacobi_smooth(J, u, b, omega, steps, inv_diag=None) -> np.ndarray:
    """``steps`` simultaneous damped-Jacobi updates u <- u + omega D^-1 (b - J u)."""
    if inv_diag is None:
        d = J.diagonal()
        if np.any(d == 0):
            raise ZeroDivisionError("system matrix has a zero diagonal entry")
        inv_diag = 1.0 / d
    w = omega * inv_diag
    for _ in range(steps):
        u = u + w * (b - J @ u)
    return u


def relative_residual(J, u, b) -> tuple[float, bool]:
    """Euclidean ||J u - b|| / ||b||; falls back to the absolute norm when b == 0.

    Returns the residual and whether the fallback was taken.
    """
    nb = np.linalg.norm(b)
    nr = np.linalg.norm(J @ u - b)
    if nb == 0:
        return float(nr), True
    return float(nr / nb), False


def v_cycle(h: LevelHierarchy, l: int, u: np.ndarray, b: np.ndarray, cfg: SolverConfig):
    """One V-cycle starting at level index ``l`` (0 = finest)."""
    if l == h.n_levels - 1:
        return h.coarse_lu.solve(b)
    lv = h.levels[l]
    pair = h.transfers[l]
    u = jacobi_smooth(lv.J, u, b, cfg.omega, cfg.nu, lv.inv_diag)
    b_c = pair.R @ (b - lv.J @ u)
    z = v_cycle(h, l + 1, np.zeros(b_c.size), b_c, cfg)
    u = u + pair.P @ z
    return jacobi_smooth(lv.J, u, b, cfg.omega, cfg.nu, lv.inv_diag)


def mg_solve(
    h: LevelHierarchy,
    b: np.ndarray | None = None,
    cfg: SolverConfig = SolverConfig(),
    u0: np.ndarray | None = None,
):
    """Iterate V-cycles until converged, diverged, or out of cycles.

    ``u0`` is the warm-start guess; zeros otherwise. Returns ``(u, report)``.
    """
    J = h.fine.J
    if b is None:
        b = h.fine.system.b
    u = np.zeros(J.shape[0]) if u0 is None else np.array(u0, dtype=np.float64)
    r, absolute = relative_residual(J, u, b)
    history = [r]
    cause = Termination.MaxCycles
    if r < cfg.tol_converge:
        return u, SolveReport(history, Termination.Converged, absolute)
    for _ in range(cfg.max_cycles):
        u = v_cycle(h, 0, u, b, cfg)
        r, _ = relative_residual(J, u, b)
        history.append(r)
        if r < cfg.tol_converge:
            cause = Termination.Converged
            break
        if not r <= cfg.tol_diverge:
            cause = Termination.Diverged
            break
    return u, SolveReport(history, cause, absolute)
