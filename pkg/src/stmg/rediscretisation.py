"""Coarse-level materials and system matrices for the eight rediscretisation methods."""

from __future__ import annotations

import dataclasses
import enum

import numpy as np

from stmg.assembly import AssembledSystem, assemble_system, dirichlet_mask
from stmg.materials import MaterialPair, clamp01, simp_eval
from stmg.mesh import CoarseningDirection, SpaceTimeGrid
from stmg.transfer import InterpolationMethod, TransferPair


class ReassemblyMethod(enum.Enum):
    K = "K"  # arithmetic mean of conductivity
    D = "D"  # arithmetic mean of design field, then SIMP
    R = "R"  # arithmetic mean of resistivity
    P = "P"  # Galerkin projection R J P


@dataclasses.dataclass(frozen=True)
class RediscretisationMethod:
    interp: InterpolationMethod
    reassembly: ReassemblyMethod

    @property
    def name(self) -> str:
        return self.interp.value + self.reassembly.value

    @property
    def unstable(self) -> bool:
        """Bilinear interpolation with Galerkin projection diverges on deep hierarchies."""
        return (
            self.interp is InterpolationMethod.Bilinear
            and self.reassembly is ReassemblyMethod.P
        )

    @classmethod
    def parse(cls, name: str) -> "RediscretisationMethod":
        name = name.strip().upper()
        if len(name) != 2:
            raise ValueError(f"method name must be two letters, got {name!r}")
        return cls(InterpolationMethod(name[0]), ReassemblyMethod(name[1]))

    def __str__(self):
        return self.name


ALL_METHODS = tuple(
    RediscretisationMethod(i, r) for i in InterpolationMethod for r in ReassemblyMethod
)


def _pairs(a: np.ndarray):
    return a[0::2], a[1::2]


def coarsen_materials(
    fine: SpaceTimeGrid,
    direction: CoarseningDirection,
    method: ReassemblyMethod,
    chi: np.ndarray | None = None,
    mat: MaterialPair | None = None,
):
    """Return ``(k, c, chi)`` for the next coarser level.

    ``chi`` is only propagated for the D method (``None`` otherwise). The P
    method returns K-averaged values, used solely to evaluate anisotropy.
    """
    fine.require_materials()
    if method is ReassemblyMethod.D and (chi is None or mat is None):
        raise ValueError("the D method needs a design field and a material pair")
    if direction is CoarseningDirection.TimeT:
        return fine.k.copy(), fine.c.copy(), (None if chi is None else np.array(chi))
    if fine.N_el % 2:
        raise ValueError("spatial coarsening needs an even element count")

    if method is ReassemblyMethod.D:
        c0, c1 = _pairs(np.asarray(chi, dtype=np.float64))
        chi_c = clamp01(0.5 * (c0 + c1))
        k, c = simp_eval(chi_c, mat)
        return k, c, chi_c

    k0, k1 = _pairs(fine.k)
    cc0, cc1 = _pairs(fine.c)
    c = 0.5 * (cc0 + cc1)
    if method is ReassemblyMethod.R:
        k = 2.0 * k0 * k1 / (k0 + k1)
    else:
        k = 0.5 * (k0 + k1)
    return k, c, None


def coarse_system(
    fine_sys: AssembledSystem,
    pair: TransferPair,
    coarse_grid: SpaceTimeGrid,
    method: ReassemblyMethod,
) -> AssembledSystem:
    """Coarse operator by rediscretisation (K, D, R) or projection (P)."""
    n_f, n_c = fine_sys.n, coarse_grid.n_dofs
    if pair.P.shape != (n_f, n_c) or pair.R.shape != (n_c, n_f):
        raise ValueError("transfer operators do not match the grids")
    if method is ReassemblyMethod.P:
        J = (pair.R @ fine_sys.J @ pair.P).tocsr()
        J.sort_indices()
        return AssembledSystem(
            grid=coarse_grid,
            J=J,
            b=None,
            w_diri=float("nan"),
            dirichlet_mask=dirichlet_mask(coarse_grid),
        )
    return assemble_system(coarse_grid)
