"""Brute-force reference solvers for the test suite.

Nothing here touches the all-at-once assembly or the multigrid code; only
``element_matrices`` is shared.
"""

from __future__ import annotations

import dataclasses
import math
import time

import numpy as np
import scipy.linalg as sla

from stmg.assembly import element_matrices
from stmg.materials import MaterialPair
from stmg.mesh import SpaceTimeGrid


@dataclasses.dataclass
class OracleResult:
    value: np.ndarray | float
    size: tuple[int, int]
    runtime: float


def _load(grid: SpaceTimeGrid, n: int) -> np.ndarray:
    f = np.zeros(grid.n_nodes)
    t = n * grid.t_T / grid.N_t
    for e in range(grid.N_el):
        x = (e + 0.5) * grid.L / grid.N_el
        r2 = (x / grid.L - 0.5) ** 2 + (t / grid.t_T - 0.5) ** 2
        qe = (1.0 + math.cos(200.0 * r2)) * 1e6
        f[e] += 0.5 * qe * grid.dx
        f[e + 1] += 0.5 * qe * grid.dx
    return f


def _dense_spatial(grid: SpaceTimeGrid):
    n = grid.n_nodes
    K = np.zeros((n, n))
    C = np.zeros((n, n))
    for e in range(grid.N_el):
        Ke, Ce = element_matrices(grid.k[e], grid.c[e], grid.dx)
        K[e : e + 2, e : e + 2] += Ke
        C[e : e + 2, e : e + 2] += Ce
    return K, C


def timestep_solve(grid: SpaceTimeGrid, zero_load: bool = False) -> OracleResult:
    """March C (T_n - T_{n-1}) / dt + K T_n = q_n from T_0 = 0 with T(x=0) = 0."""
    t0 = time.perf_counter()
    grid.require_materials()
    K, C = _dense_spatial(grid)
    A = (C / grid.dt + K)[1:, 1:]
    M = (C / grid.dt)[1:, 1:]
    lu = sla.lu_factor(A)
    T = np.zeros((grid.n_times, grid.n_nodes))
    for n in range(1, grid.n_times):
        rhs = M @ T[n - 1, 1:]
        if not zero_load:
            rhs = rhs + _load(grid, n)[1:]
        T[n, 1:] = sla.lu_solve(lu, rhs)
    return OracleResult(T.ravel(), (grid.N_el, grid.N_t), time.perf_counter() - t0)


def load_oracle(grid: SpaceTimeGrid) -> np.ndarray:
    """Nodal load with the Dirichlet entries zeroed, element loop by element loop."""
    b = np.zeros((grid.n_times, grid.n_nodes))
    for n in range(1, grid.n_times):
        b[n] = _load(grid, n)
        b[n, 0] = 0.0
    return b.ravel()


def theta_oracle(chi, bare: SpaceTimeGrid, mat: MaterialPair, theta_ref: float = 1e6) -> float:
    # no box check: finite differences step slightly outside [0, 1]
    k = mat.k_ins + (mat.k_con - mat.k_ins) * chi**mat.p_k
    c = mat.c_ins + (mat.c_con - mat.c_ins) * chi**mat.p_c
    grid = bare.with_materials(k, c)
    u = timestep_solve(grid).value
    return float(load_oracle(grid) @ u * grid.dt / theta_ref)


def fd_gradient(chi, bare: SpaceTimeGrid, mat: MaterialPair, step: float = 1e-6,
                theta_ref: float = 1e6) -> OracleResult:
    """Central differences of the objective, one full re-solve per perturbation."""
    t0 = time.perf_counter()
    chi = np.asarray(chi, dtype=np.float64)
    grad = np.zeros_like(chi)
    for e in range(chi.size):
        up, dn = chi.copy(), chi.copy()
        up[e] += step
        dn[e] -= step
        grad[e] = (theta_oracle(up, bare, mat, theta_ref) - theta_oracle(dn, bare, mat, theta_ref)) / (2 * step)
    return OracleResult(grad, (bare.N_el, bare.N_t), time.perf_counter() - t0)
