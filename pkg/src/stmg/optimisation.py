"""Transient compliance minimisation: objective, discrete adjoint, MMA, and the outer loop."""

from __future__ import annotations

import csv
import dataclasses
import logging

import numpy as np

from stmg.assembly import dirichlet_mask, element_loads, load_vector
from stmg.materials import (
    ALUMINIUM_EPOXY,
    MaterialPair,
    check_design,
    grid_with_design,
    simp_derivatives,
)
from stmg.mesh import SpaceTimeGrid
from stmg.multigrid import (
    LevelHierarchy,
    SolveReport,
    SolverConfig,
    Termination,
    build_hierarchy,
    build_transfers,
    mg_solve,
)
from stmg.rediscretisation import RediscretisationMethod
from stmg.strategy import CoarseningPath, DesignIndependent, plan_coarsening

log = logging.getLogger(__name__)


class SolverDivergence(RuntimeError):
    pass


@dataclasses.dataclass(frozen=True)
class OptimisationConfig:
    mat: MaterialPair = ALUMINIUM_EPOXY
    L: float = 0.1
    t_T: float = 10.0
    N_el: int = 256
    N_t: int = 256
    theta_ref: float = 1e6
    volume_fraction: float = 0.5
    method: str = "CR"
    restart: str = "warm"  # or "cold"
    N_l: int = 6
    lambda_crit: float = 0.25
    nu: int = 20
    change_tol: float = 1e-3
    change_window: int = 5
    max_cycles: int = 500
    move_limit: float = 0.2

    def __post_init__(self):
        if self.change_window < 1:
            raise ValueError("change_window must be >= 1")
        if self.theta_ref <= 0:
            raise ValueError("theta_ref must be positive")
        if self.restart not in ("warm", "cold"):
            raise ValueError("restart must be 'warm' or 'cold'")
        RediscretisationMethod.parse(self.method)

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig(nu=self.nu)


def objective(b, u, dt, theta_ref) -> float:
    """Time-integrated compliance b.u dt, normalised by ``theta_ref``."""
    return float(np.dot(b, u) * dt / theta_ref)


def adjoint_solve(
    h: LevelHierarchy,
    b: np.ndarray,
    dt: float,
    theta_ref: float,
    cfg: SolverConfig = SolverConfig(),
    lam0: np.ndarray | None = None,
    h_adj: LevelHierarchy | None = None,
):
    """Solve J^T lam = b dt / theta_ref with V-cycles on the transposed hierarchy.

    Prolongation and restriction are the primal ones.
    """
    if h_adj is None:
        h_adj = h.transposed()
    return mg_solve(h_adj, b * dt / theta_ref, cfg, lam0)


def sensitivities(u, lam, chi, grid: SpaceTimeGrid, mat: MaterialPair) -> np.ndarray:
    """d(theta)/d(chi_e) = -lam^T (dJ/dchi_e) u, accumulated element by element.

    Both vectors are masked to the free DOFs, matching ``J = B J_neu B + W (I - B)``.
    """
    dk, dc = simp_derivatives(chi, mat)
    mask = dirichlet_mask(grid)
    U = grid.as_field(np.where(mask, 0.0, u))
    Lm = grid.as_field(np.where(mask, 0.0, lam))

    # conductivity part over time levels 1..N_t
    du = U[1:, :-1] - U[1:, 1:]
    dl = Lm[1:, :-1] - Lm[1:, 1:]
    k_term = dk / grid.dx * np.sum(dl * du, axis=0)

    # capacity part acts on the backward difference in time
    W = U[1:] - U[:-1]
    la, lb = Lm[1:, :-1], Lm[1:, 1:]
    wa, wb = W[:, :-1], W[:, 1:]
    c_pair = np.sum(2 * la * wa + la * wb + lb * wa + 2 * lb * wb, axis=0)
    c_term = dc * grid.dx / 6.0 / grid.dt * c_pair
    return -(k_term + c_term)


def volume_constraint(chi, dx, L, fraction: float = 0.5):
    """``g <= 0`` form of sum(chi) dx <= fraction L, and its gradient."""
    chi = np.asarray(chi)
    cap = fraction * L
    return float(np.sum(chi) * dx / cap - 1.0), np.full(chi.shape, dx / cap)


# MMA -------------------------------------------------------------------------


@dataclasses.dataclass
class MMAState:
    x_old1: np.ndarray | None = None
    x_old2: np.ndarray | None = None
    low: np.ndarray | None = None
    upp: np.ndarray | None = None
    iteration: int = 0


@dataclasses.dataclass(frozen=True)
class MMASubproblem:
    """Separable convex approximation at ``x`` restricted to ``[alpha, beta]``.

    Objective terms ``p0/(U-y) + q0/(y-L)``; constraint terms likewise with
    ``p1, q1`` and the constant ``r1`` so that the approximation equals ``g`` at ``x``.
    """

    low: np.ndarray
    upp: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    p0: np.ndarray
    q0: np.ndarray
    p1: np.ndarray
    q1: np.ndarray
    r1: float

    def objective(self, y):
        return np.sum(self.p0 / (self.upp - y) + self.q0 / (y - self.low), axis=-1)

    def constraint(self, y):
        return self.r1 + np.sum(self.p1 / (self.upp - y) + self.q1 / (y - self.low), axis=-1)

    def primal(self, mu: float) -> np.ndarray:
        P = np.sqrt(self.p0 + mu * self.p1)
        Q = np.sqrt(self.q0 + mu * self.q1)
        y = (P * self.low + Q * self.upp) / (P + Q)
        return np.clip(y, self.alpha, self.beta)

    def solve(self, tol: float = 1e-14, max_iter: int = 200) -> np.ndarray:
        """Dual bisection on the single constraint multiplier."""
        y = self.primal(0.0)
        if self.constraint(y) <= 0:
            return y
        lo, hi = 0.0, 1.0
        while self.constraint(self.primal(hi)) > 0:
            hi *= 2.0
            if hi > 1e100:
                return self.primal(hi)
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            if self.constraint(self.primal(mid)) > 0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= tol * max(1.0, hi):
                break
        else:
            raise RuntimeError("MMA dual bisection did not converge")
        return self.primal(hi)


_ASY_INIT, _ASY_DECR, _ASY_INCR = 0.5, 0.7, 1.2
_ALBEFA, _RAA0 = 0.1, 1e-5


def mma_subproblem(x, df, g, dg, state: MMAState, move=0.2, xmin=0.0, xmax=1.0) -> MMASubproblem:
    """Build the subproblem and advance the asymptotes stored in ``state``."""
    x = np.asarray(x, dtype=np.float64)
    span = xmax - xmin
    if state.iteration < 2:
        low = x - _ASY_INIT * span
        upp = x + _ASY_INIT * span
    else:
        sign = (x - state.x_old1) * (state.x_old1 - state.x_old2)
        factor = np.where(sign > 0, _ASY_INCR, np.where(sign < 0, _ASY_DECR, 1.0))
        low = x - factor * (state.x_old1 - state.low)
        upp = x + factor * (state.upp - state.x_old1)
        low = np.clip(low, x - 10 * span, x - 0.01 * span)
        upp = np.clip(upp, x + 0.01 * span, x + 10 * span)
    alpha = np.maximum.reduce([np.full_like(x, xmin), low + _ALBEFA * (x - low), x - move * span])
    beta = np.minimum.reduce([np.full_like(x, xmax), upp - _ALBEFA * (upp - x), x + move * span])

    def terms(d):
        pos, neg = np.maximum(d, 0.0), np.maximum(-d, 0.0)
        reg = _RAA0 / max(span, 1e-5)
        p = (upp - x) ** 2 * (1.001 * pos + 0.001 * neg + reg)
        q = (x - low) ** 2 * (0.001 * pos + 1.001 * neg + reg)
        return p, q

    p0, q0 = terms(np.asarray(df, dtype=np.float64))
    p1, q1 = terms(np.asarray(dg, dtype=np.float64))
    r1 = g - np.sum(p1 / (upp - x) + q1 / (x - low))

    state.x_old2 = state.x_old1
    state.x_old1 = x.copy()
    state.low, state.upp = low, upp
    state.iteration += 1
    return MMASubproblem(low, upp, alpha, beta, p0, q0, p1, q1, float(r1))


def mma_update(x, df, g, dg, state: MMAState, move=0.2) -> np.ndarray:
    return mma_subproblem(x, df, g, dg, state, move).solve()


# Outer loop ------------------------------------------------------------------


@dataclasses.dataclass
class CycleRecord:
    cycle: int
    theta: float
    volume: float
    primal_cycles: int
    adjoint_cycles: int
    primal_cause: str
    adjoint_cause: str


@dataclasses.dataclass
class OptimisationState:
    chi: np.ndarray
    u_prev: np.ndarray | None = None
    lam_prev: np.ndarray | None = None
    mma: MMAState = dataclasses.field(default_factory=MMAState)
    history: list[CycleRecord] = dataclasses.field(default_factory=list)
    designs: list[np.ndarray] = dataclasses.field(default_factory=list)
    path: CoarseningPath | None = None
    converged: bool = False

    def write_history(self, path, restart: str, method: str):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["cycle", "theta", "volume", "primal_cycles", "adjoint_cycles", "restart_mode", "method"]
            )
            for r in self.history:
                w.writerow(
                    [r.cycle, repr(r.theta), repr(r.volume), r.primal_cycles, r.adjoint_cycles, restart, method]
                )


def _check(report: SolveReport, what: str, cycle: int):
    if report.cause is Termination.Diverged:
        raise SolverDivergence(
            f"{what} solve diverged at optimisation cycle {cycle}: "
            f"residuals {report.residual_history[-3:]}"
        )


def optimise(cfg: OptimisationConfig = OptimisationConfig(), callback=None) -> OptimisationState:
    """Nested STMG/MMA optimisation from the uniform design chi = 1/2.

    The coarsening path and transfer operators are fixed up front from the
    design-independent effective diffusivity; only the level matrices change
    between cycles.
    """
    method = RediscretisationMethod.parse(cfg.method)
    bare = SpaceTimeGrid(cfg.L, cfg.t_T, cfg.N_el, cfg.N_t)
    chi = np.full(cfg.N_el, 0.5)
    path = plan_coarsening(
        bare, cfg.N_l, cfg.lambda_crit, DesignIndependent(cfg.mat), method.reassembly
    )
    transfers = build_transfers(bare, path, method.interp)
    q = element_loads(bare)
    b = load_vector(bare, q)
    b[dirichlet_mask(bare)] = 0.0
    solver = cfg.solver
    state = OptimisationState(chi=chi, path=path)

    prev_theta, small = None, 0
    for cycle in range(1, cfg.max_cycles + 1):
        grid = grid_with_design(bare, state.chi, cfg.mat)
        h = build_hierarchy(grid, method, path, state.chi, cfg.mat, transfers, q)
        warm = cfg.restart == "warm"
        u, rep_u = mg_solve(h, b, solver, state.u_prev if warm else None)
        _check(rep_u, "primal", cycle)
        theta = objective(b, u, grid.dt, cfg.theta_ref)
        lam, rep_l = adjoint_solve(
            h, b, grid.dt, cfg.theta_ref, solver, state.lam_prev if warm else None
        )
        _check(rep_l, "adjoint", cycle)
        dtheta = sensitivities(u, lam, state.chi, grid, cfg.mat)
        g, dg = volume_constraint(state.chi, grid.dx, cfg.L, cfg.volume_fraction)

        state.history.append(
            CycleRecord(
                cycle, theta, float(np.sum(state.chi) * grid.dx / cfg.L),
                rep_u.cycles, rep_l.cycles, rep_u.cause.value, rep_l.cause.value,
            )
        )
        state.designs.append(state.chi.copy())
        state.u_prev, state.lam_prev = u, lam
        log.info(
            "cycle %d theta %.6g primal %d adjoint %d", cycle, theta, rep_u.cycles, rep_l.cycles
        )
        if callback is not None:
            callback(state)

        if prev_theta is not None and abs(theta - prev_theta) < cfg.change_tol * abs(prev_theta):
            small += 1
        else:
            small = 0
        prev_theta = theta
        if small >= cfg.change_window:
            state.converged = True
            break
        state.chi = check_design(
            mma_update(state.chi, dtheta, g, dg, state.mma, cfg.move_limit)
        )
    return state


def fraction_grey(chi, lo=0.01, hi=0.99) -> float:
    chi = np.asarray(chi)
    return float(np.mean((chi > lo) & (chi < hi)))


def total_cycles(state: OptimisationState) -> tuple[int, int]:
    return (
        sum(r.primal_cycles for r in state.history),
        sum(r.adjoint_cycles for r in state.history),
    )

