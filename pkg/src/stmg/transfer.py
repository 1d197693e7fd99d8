"""Prolongation and restriction between consecutive space-time levels.

Both operators are Kronecker products of a temporal and a spatial 1D factor,
matching the time-major DOF ordering.
"""

from __future__ import annotations

import dataclasses
import enum

import numpy as np
import scipy.sparse as sp

from stmg.mesh import CoarseningDirection, SpaceTimeGrid, coarsen_grid


class InterpolationMethod(enum.Enum):
    Causal = "C"
    Bilinear = "B"


@dataclasses.dataclass(frozen=True)
class TransferPair:
    P: sp.csr_matrix
    R: sp.csr_matrix
    s: float
    direction: CoarseningDirection


def restriction_scale(direction: CoarseningDirection) -> float:
    return 1.0 if direction is CoarseningDirection.SpaceX else 0.5


def _linear_1d(n_fine: int) -> sp.csr_matrix:
    """Spatial factor: coincident node weight 1, odd neighbours 1/2."""
    n_coarse = (n_fine - 1) // 2 + 1
    cols = np.arange(n_coarse)
    rows = [2 * cols, 2 * cols[:-1] + 1, 2 * cols[1:] - 1]
    vals = [np.ones(n_coarse), np.full(n_coarse - 1, 0.5), np.full(n_coarse - 1, 0.5)]
    r = np.concatenate(rows)
    c = np.concatenate([cols, cols[:-1], cols[1:]])
    return sp.csr_matrix((np.concatenate(vals), (r, c)), shape=(n_fine, n_coarse))


def _causal_1d(n_fine: int) -> sp.csr_matrix:
    """Temporal factor copying coarse point N forward to fine points 2N and 2N+1."""
    n_coarse = (n_fine - 1) // 2 + 1
    cols = np.arange(n_coarse)
    nxt = cols[2 * cols + 1 < n_fine]
    r = np.concatenate([2 * cols, 2 * nxt + 1])
    c = np.concatenate([cols, nxt])
    return sp.csr_matrix((np.ones(r.size), (r, c)), shape=(n_fine, n_coarse))


def _identity(n: int) -> sp.csr_matrix:
    return sp.identity(n, format="csr")


def build_prolongation(
    fine: SpaceTimeGrid,
    coarse: SpaceTimeGrid,
    direction: CoarseningDirection,
    interp: InterpolationMethod,
) -> sp.csr_matrix:
    expected = coarsen_grid(fine, direction)
    if (coarse.N_el, coarse.N_t) != (expected.N_el, expected.N_t):
        raise ValueError("coarse grid does not match the requested coarsening of fine")
    if direction is CoarseningDirection.FullST and interp is not InterpolationMethod.Causal:
        raise ValueError("full space-time coarsening is only defined for causal interpolation")

    if direction is CoarseningDirection.SpaceX:
        Pt = _identity(fine.n_times)
    elif interp is InterpolationMethod.Causal:
        Pt = _causal_1d(fine.n_times)
    else:
        Pt = _linear_1d(fine.n_times)

    if direction is CoarseningDirection.TimeT:
        Px = _identity(fine.n_nodes)
    else:
        Px = _linear_1d(fine.n_nodes)

    P = sp.kron(Pt, Px, format="csr")
    P.sort_indices()
    return P


def build_restriction(P: sp.spmatrix, direction: CoarseningDirection) -> sp.csr_matrix:
    R = (restriction_scale(direction) * P.T).tocsr()
    R.sort_indices()
    return R


def build_transfer(
    fine: SpaceTimeGrid,
    coarse: SpaceTimeGrid,
    direction: CoarseningDirection,
    interp: InterpolationMethod,
) -> TransferPair:
    P = build_prolongation(fine, coarse, direction, interp)
    return TransferPair(
        P=P,
        R=build_restriction(P, direction),
        s=restriction_scale(direction),
        direction=direction,
    )
