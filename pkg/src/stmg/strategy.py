"""Anisotropy indicators and coarsening-path planning."""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from stmg.materials import MaterialPair, simp_eval
from stmg.mesh import CoarseningDirection, SpaceTimeGrid, can_coarsen, coarsen_grid
from stmg.rediscretisation import ReassemblyMethod, coarsen_materials

X = CoarseningDirection.SpaceX
T = CoarseningDirection.TimeT


def anisotropy(D, dt, dx):
    """Ratio of diffusive to temporal coupling, D dt / dx^2."""
    return D * dt / dx**2


@dataclasses.dataclass(frozen=True)
class AnisotropyReport:
    lambda_e: np.ndarray
    lambda_min: float
    lambda_max: float
    lambda_eff: float
    D_eff: float


def effective_lambda(grid: SpaceTimeGrid) -> AnisotropyReport:
    grid.require_materials()
    D = grid.k / grid.c
    lam = anisotropy(D, grid.dt, grid.dx)
    lo, hi = float(lam.min()), float(lam.max())
    return AnisotropyReport(
        lambda_e=lam,
        lambda_min=lo,
        lambda_max=hi,
        lambda_eff=math.sqrt(lo * hi),
        D_eff=math.sqrt(float(D.min()) * float(D.max())),
    )


def lambda_eff_candidates(grid: SpaceTimeGrid) -> dict[str, float]:
    """All indicator expressions that were compared; only ``geo_minmax`` is used for planning."""
    lam = effective_lambda(grid).lambda_e
    lo, hi = lam.min(), lam.max()
    n = lam.size
    return {
        "geo_minmax": float(np.sqrt(lo * hi)),
        "geo_all": float(np.exp(np.mean(np.log(lam)))),
        "arith_minmax": float((lo + hi) / 2),
        "arith_all": float(lam.mean()),
        "harm_minmax": float(2 / (1 / lo + 1 / hi)),
        "harm_all": float(n / np.sum(1 / lam)),
        "min": float(lo),
        "max": float(hi),
    }


def design_independent_Deff(mat: MaterialPair, n_samples: int = 1001) -> float:
    """Geometric mean of the SIMP diffusivity at pure insulator and pure conductor.

    Raises if the sampled SIMP diffusivity leaves the range spanned by its
    end points, in which case the end-point formula would not bound it.
    """
    chi = np.linspace(0.0, 1.0, n_samples)
    k, c = simp_eval(chi, mat)
    D = k / c
    d0, d1 = D[0], D[-1]
    lo, hi = min(d0, d1), max(d0, d1)
    slack = 1e-12 * hi
    if D.min() < lo - slack or D.max() > hi + slack:
        raise ValueError(
            "SIMP diffusivity has an interior extremum; end-point D_eff does not apply"
        )
    return math.sqrt(d0 * d1)


# Planning modes
@dataclasses.dataclass(frozen=True)
class Uniform:
    name = "uniform"


@dataclasses.dataclass(frozen=True)
class Contrast:
    name = "contrast"


@dataclasses.dataclass(frozen=True)
class Resolution:
    M: int
    name = "resolution"


@dataclasses.dataclass(frozen=True)
class DesignIndependent:
    mat: MaterialPair
    name = "design-independent"


@dataclasses.dataclass(frozen=True)
class CoarseningPath:
    directions: tuple[CoarseningDirection, ...]
    strategy: str = "given"
    lambda_crit: float = 0.25
    M: int | None = None
    indicators: tuple[float, ...] = ()

    def __len__(self):
        return len(self.directions)

    def to_text(self) -> str:
        return ",".join(d.value for d in self.directions)

    @classmethod
    def from_text(cls, text: str, **kw) -> "CoarseningPath":
        tokens = [t for t in text.replace(" ", "").split(",") if t]
        return cls(tuple(CoarseningDirection.parse(t) for t in tokens), **kw)


def _indicator(mode, grid: SpaceTimeGrid, D_fixed: float | None) -> float:
    if isinstance(mode, DesignIndependent):
        return anisotropy(D_fixed, grid.dt, grid.dx)
    if isinstance(mode, Uniform):
        D = grid.k / grid.c
        if not np.all(D == D[0]):
            raise ValueError("uniform planning requires uniform diffusivity")
        return anisotropy(float(D[0]), grid.dt, grid.dx)
    return effective_lambda(grid).lambda_eff


def plan_coarsening(
    fine: SpaceTimeGrid,
    N_l: int,
    lambda_crit: float = 0.25,
    mode=Contrast(),
    reassembly: ReassemblyMethod = ReassemblyMethod.K,
    chi: np.ndarray | None = None,
    mat: MaterialPair | None = None,
) -> CoarseningPath:
    """Choose t-coarsening when the level indicator is below ``lambda_crit``, else x.

    Materials are carried down with ``reassembly`` so coarse indicators see the
    coarse materials the solver will use. ``Resolution(M)`` additionally forces
    t-coarsening once x-coarsening would leave fewer than ``M`` elements.
    """
    if N_l < 1:
        raise ValueError("N_l must be >= 1")
    D_fixed = design_independent_Deff(mode.mat) if isinstance(mode, DesignIndependent) else None
    if D_fixed is None:
        fine.require_materials()
    if isinstance(mode, DesignIndependent) or reassembly is not ReassemblyMethod.D:
        chi_l = None
    else:
        chi_l = chi
    grid = fine
    dirs, inds = [], []
    for level in range(1, N_l):
        ind = _indicator(mode, grid, D_fixed)
        forced = isinstance(mode, Resolution) and grid.N_el / 2 < mode.M
        choice = T if (ind < lambda_crit or forced) else X
        if not can_coarsen(grid, choice):
            other = X if choice is T else T
            if forced or not can_coarsen(grid, other):
                raise ValueError(
                    f"cannot coarsen level {level} (N_el={grid.N_el}, N_t={grid.N_t})"
                )
            choice = other
        coarse = coarsen_grid(grid, choice)
        if D_fixed is None:
            k, c, chi_l = coarsen_materials(grid, choice, reassembly, chi_l, mat)
            coarse = coarse.with_materials(k, c)
        dirs.append(choice)
        inds.append(float(ind))
        grid = coarse
    return CoarseningPath(
        directions=tuple(dirs),
        strategy=mode.name,
        lambda_crit=lambda_crit,
        M=getattr(mode, "M", None),
        indicators=tuple(inds),
    )
