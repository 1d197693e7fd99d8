"""Backward-Euler / linear-FE assembly of the all-at-once space-time system."""

from __future__ import annotations

import dataclasses

import numpy as np
import scipy.sparse as sp

from stmg.mesh import SpaceTimeGrid


@dataclasses.dataclass(frozen=True)
class AssembledSystem:
    """System matrix ``J`` and right-hand side ``b`` for one level.

    ``b`` is ``None`` for Galerkin-projected coarse levels, whose right-hand
    side always comes from restricted residuals.
    """

    grid: SpaceTimeGrid
    J: sp.csr_matrix
    b: np.ndarray | None
    w_diri: float
    dirichlet_mask: np.ndarray

    @property
    def n(self) -> int:
        return self.J.shape[0]

    def transposed(self) -> "AssembledSystem":
        return dataclasses.replace(self, J=self.J.T.tocsr(), b=None)


def element_matrices(k_e: float, c_e: float, dx: float):
    """Element conductivity and consistent capacity matrices for linear shape functions."""
    if k_e <= 0 or c_e <= 0 or dx <= 0:
        raise ValueError("k_e, c_e and dx must be positive")
    K_e = (k_e / dx) * np.array([[1.0, -1.0], [-1.0, 1.0]])
    C_e = (c_e * dx / 6.0) * np.array([[2.0, 1.0], [1.0, 2.0]])
    return K_e, C_e


def _tridiag_from_elements(diag_w: np.ndarray, off_w: np.ndarray) -> sp.csr_matrix:
    # element e contributes diag_w[e] to (e,e),(e+1,e+1) and off_w[e] to (e,e+1),(e+1,e)
    n = diag_w.size + 1
    diag = np.zeros(n)
    diag[:-1] += diag_w
    diag[1:] += diag_w
    return sp.diags([off_w, diag, off_w], [-1, 0, 1], shape=(n, n), format="csr")


def assemble_spatial(grid: SpaceTimeGrid):
    """Neumann-only spatial conductivity ``K`` and capacity ``C`` matrices."""
    grid.require_materials()
    dx = grid.dx
    K = _tridiag_from_elements(grid.k / dx, -grid.k / dx)
    C = _tridiag_from_elements(grid.c * dx / 3.0, grid.c * dx / 6.0)
    return K, C


def w_diri(grid: SpaceTimeGrid) -> float:
    """Diagonal weight of Dirichlet rows, sized like the largest entries of ``J``."""
    grid.require_materials()
    return float(np.max(grid.c) * grid.dx / grid.dt + np.max(grid.k) / grid.dx)


def dirichlet_mask(grid: SpaceTimeGrid) -> np.ndarray:
    """True at fixed DOFs: node 0 at every time level and every node at t=0."""
    mask = np.zeros((grid.n_times, grid.n_nodes), dtype=bool)
    mask[0, :] = True
    mask[:, 0] = True
    return mask.ravel()


def heat_load_value(x_e, t_j, L, t_T):
    """Multi-frequency test heat load in W/m^3."""
    arg = (np.asarray(x_e) / L - 0.5) ** 2 + (np.asarray(t_j) / t_T - 0.5) ** 2
    return (1.0 + np.cos(200.0 * arg)) * 1e6


def element_loads(grid: SpaceTimeGrid) -> np.ndarray:
    """``q[n, e]`` sampled at element centres and time points."""
    return heat_load_value(
        grid.element_centres()[None, :], grid.time_points()[:, None], grid.L, grid.t_T
    )


def load_vector(grid: SpaceTimeGrid, q: np.ndarray | None = None) -> np.ndarray:
    """Unmasked nodal load; each element puts q*dx/2 on both of its nodes."""
    if q is None:
        q = element_loads(grid)
    half = 0.5 * grid.dx * q
    b = np.zeros((grid.n_times, grid.n_nodes))
    b[:, :-1] += half
    b[:, 1:] += half
    b[0, :] = 0.0
    return b.ravel()


def assemble_neumann(grid: SpaceTimeGrid) -> sp.csr_matrix:
    """Block lower-bidiagonal operator before boundary conditions.

    Block row 0 is left empty; the initial condition is imposed by masking.
    """
    K, C = assemble_spatial(grid)
    n_t = grid.n_times
    active = sp.diags(np.r_[0.0, np.ones(n_t - 1)], format="csr")
    lower = sp.diags(np.ones(n_t - 1), -1, shape=(n_t, n_t), format="csr")
    Cdt = C / grid.dt
    return (sp.kron(active, Cdt + K) - sp.kron(lower, Cdt)).tocsr()


def apply_dirichlet(J_neu: sp.spmatrix, mask: np.ndarray, weight: float) -> sp.csr_matrix:
    """Return ``B J_neu B + weight (I - B)`` with ``B = diag(~mask)``."""
    keep = (~mask).astype(np.float64)
    B = sp.diags(keep)
    J = (B @ J_neu @ B + sp.diags(weight * mask.astype(np.float64))).tocsr()
    J.eliminate_zeros()
    J.sort_indices()
    return J


def assemble_system(grid: SpaceTimeGrid, q: np.ndarray | None = None) -> AssembledSystem:
    grid.require_materials()
    mask = dirichlet_mask(grid)
    weight = w_diri(grid)
    J = apply_dirichlet(assemble_neumann(grid), mask, weight)
    b = load_vector(grid, q)
    b[mask] = 0.0
    return AssembledSystem(grid=grid, J=J, b=b, w_diri=weight, dirichlet_mask=mask)
