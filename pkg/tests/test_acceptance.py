"""Acceptance criteria, one test per criterion.

Each criterion records a single ``PASS``/``FAIL`` line that is printed in the
pytest terminal summary. Run this file directly to evaluate all of them
without pytest.
"""

from __future__ import annotations

import sys
import time
from functools import lru_cache

import numpy as np

from stmg.materials import ALUMINIUM_EPOXY, simp_derivatives, simp_eval
from stmg.mesh import CoarseningDirection, SpaceTimeGrid, coarsen_grid
from stmg.multigrid import SolverConfig, Termination, build_hierarchy, mg_solve, v_cycle
from stmg.optimisation import OptimisationConfig, adjoint_solve, optimise, sensitivities, total_cycles
from stmg.oracle import fd_gradient, timestep_solve
from stmg.problems import get_problem, sweep_t_T
from stmg.rediscretisation import ALL_METHODS, RediscretisationMethod, coarsen_materials
from stmg.strategy import (
    CoarseningPath,
    Contrast,
    DesignIndependent,
    effective_lambda,
    plan_coarsening,
)
from stmg.experiments import crossover_log2
from stmg.transfer import InterpolationMethod, build_transfer

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = {}

X, T, F = CoarseningDirection.SpaceX, CoarseningDirection.TimeT, CoarseningDirection.FullST
NAMES = {
    1: "oracle equivalence",
    2: "uniform-material two-grid sweep",
    3: "contrast crossover range",
    4: "BP instability",
    5: "problem-8 method ordering",
    6: "adjoint gradient check",
    7: "optimisation robustness",
    8: "structural invariants",
}


def _record(n: int, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} criterion {n} ({NAMES[n]}): {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line, flush=True)
    return ok


def _solve(grid, chi, mat, method, path, nu=5):
    h = build_hierarchy(grid, method, path, chi, mat)
    return mg_solve(h, cfg=SolverConfig(nu=nu))


def _contrast_path(grid, chi, mat, method, N_l):
    return plan_coarsening(grid, N_l, 0.25, Contrast(), method.reassembly, chi, mat)


# 1 ---------------------------------------------------------------------------


def criterion_1() -> bool:
    t0 = time.perf_counter()
    ck = RediscretisationMethod.parse("CK")
    worst, bad = 0.0, []
    for p in range(10):
        prob = get_problem(p)
        g, chi = prob.build(64, 64)
        u, rep = _solve(g, chi, prob.mat, ck, _contrast_path(g, chi, prob.mat, ck, 6))
        ref = timestep_solve(g).value
        err = np.linalg.norm(u - ref) / np.linalg.norm(ref)
        worst = max(worst, err)
        if rep.cause is not Termination.Converged or not err < 1e-6:
            bad.append(p)
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    return _record(1, ok, f"max rel. error {worst:.2e} (< 1e-6), runtime {dt:.1f}s (< 60s)"
                   + (f", failing problems {bad}" if bad else ""))


# 2 ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def uniform_sweep():
    prob = get_problem(0)
    ck = RediscretisationMethod.parse("CK")
    lam, fac = [], {X: [], T: [], F: []}
    for e in range(-18, 3):
        g, chi = prob.build(256, 256, t_T=2.0**e)
        lam.append(effective_lambda(g).lambda_eff)
        for d in fac:
            _, rep = _solve(g, chi, prob.mat, ck, CoarseningPath((d,)))
            fac[d].append(rep.convergence_factor)
    return np.array(lam), {d: np.array(v) for d, v in fac.items()}


def criterion_2() -> bool:
    lam, f = uniform_sweep()
    hi, lo = lam >= 1, lam <= 2.0**-5
    a = bool(np.all(f[X][hi] < f[T][hi]))
    b = bool(np.all(f[T][lo] < f[X][lo]))
    cross = [2.0**c for c in crossover_log2(np.log2(lam), f[X], f[T])]
    c = len(cross) > 0 and all(0.03 <= x <= 0.3 for x in cross)
    d1 = bool(np.all(f[F] >= np.maximum(f[X], f[T])))
    mid = (lam >= 2.0**-2) & (lam <= 2.0**2)
    d2 = bool(np.any(f[F][mid] > 0.9))
    gap = float(np.min(f[F] - np.maximum(f[X], f[T])))
    detail = (
        f"x<t for lam>=1: {a}; t<x for lam<=2^-5: {b}; "
        f"crossover lam {', '.join(f'{x:.3f}' for x in cross) or 'none'} in [0.03, 0.3]: {c}; "
        f"full >= max(x,t) everywhere: {d1} (min margin {gap:.2e}); "
        f"full > 0.9 in [2^-2, 2^2]: {d2} (max {f[F][mid].max():.3f})"
    )
    return _record(2, a and b and c and d1 and d2, detail)


# 3 ---------------------------------------------------------------------------


def contrast_crossovers():
    ck = RediscretisationMethod.parse("CK")
    out = {}
    for p in range(1, 7):
        prob = get_problem(p)
        lam, fx, ft = [], [], []
        for t_T in sweep_t_T(prob, 0.25):
            g, chi = prob.build(256, 256, t_T=t_T)
            lam.append(np.log2(effective_lambda(g).lambda_eff))
            fx.append(_solve(g, chi, prob.mat, ck, CoarseningPath((X,)))[1].convergence_factor)
            ft.append(_solve(g, chi, prob.mat, ck, CoarseningPath((T,)))[1].convergence_factor)
        out[p] = crossover_log2(lam, fx, ft)
    return out


def criterion_3() -> bool:
    cross = contrast_crossovers()
    ok = all(c and all(-3.5 <= x <= -0.5 for x in c) for c in cross.values())
    detail = "; ".join(
        f"P{p}: log2 lam_eff = {', '.join(f'{x:.2f}' for x in c) or 'no crossing'}"
        for p, c in cross.items()
    )
    return _record(3, ok, detail + " (all in [-3.5, -0.5])")


# 4 ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def levels_table(pnum: int, names: tuple[str, ...], levels: tuple[int, ...]):
    prob = get_problem(pnum)
    g, chi = prob.build(256, 256)
    out = {}
    for name in names:
        m = RediscretisationMethod.parse(name)
        for n_l in levels:
            _, rep = _solve(g, chi, prob.mat, m, _contrast_path(g, chi, prob.mat, m, n_l))
            out[name, n_l] = rep
    return out


def criterion_4() -> bool:
    names = tuple(m.name for m in ALL_METHODS)
    tab = levels_table(7, names, tuple(range(2, 11)))
    bp5 = tab["BP", 5].convergence_factor
    a = bp5 > 1e3
    b = all(tab["BP", n].cause is Termination.Diverged for n in range(5, 11))
    others = [(m, n) for m in names if m != "BP" for n in range(2, 11)]
    worst = max(tab[k].convergence_factor for k in others)
    c = worst < 1
    bp_all = ", ".join(f"{tab['BP', n].convergence_factor:.2g}" for n in range(5, 11))
    detail = (
        f"BP factor at N_l=5 {bp5:.3g} (> 1e3): {a}; "
        f"BP diverged for N_l 5..10: {b} "
        f"(factors {bp_all}); "
        f"other methods max factor {worst:.3f} (< 1): {c}"
    )
    return _record(4, a and b and c, detail)


# 5 ---------------------------------------------------------------------------


def criterion_5() -> bool:
    levels = tuple(range(6, 11))
    tab = levels_table(8, ("CK", "CR", "CP"), levels)
    f = {k: v.convergence_factor for k, v in tab.items()}
    ok = all(f["CR", n] + 0.01 < f["CK", n] and f["CR", n] + 0.01 < f["CP", n] for n in levels)
    detail = "; ".join(
        f"N_l={n}: CR {f['CR', n]:.3f} CK {f['CK', n]:.3f} CP {f['CP', n]:.3f}" for n in levels
    )
    return _record(5, ok, detail + " (CR lower by >= 0.01)")


# 6 ---------------------------------------------------------------------------


def criterion_6() -> bool:
    t0 = time.perf_counter()
    mat = ALUMINIUM_EPOXY
    prob = get_problem(7)
    grid, chi = prob.build(16, 16)
    bare = SpaceTimeGrid(grid.L, grid.t_T, 16, 16)
    m = RediscretisationMethod.parse("CR")
    path = plan_coarsening(bare, 3, mode=DesignIndependent(mat))
    h = build_hierarchy(grid, m, path, chi, mat)
    cfg = SolverConfig(nu=20)
    u, _ = mg_solve(h, cfg=cfg)
    lam, _ = adjoint_solve(h, h.fine.system.b, grid.dt, 1e6, cfg)
    got = sensitivities(u, lam, chi, grid, mat)
    ref = fd_gradient(chi, bare, mat).value
    err = float(np.max(np.abs(got - ref)) / np.max(np.abs(ref)))
    dt = time.perf_counter() - t0
    return _record(6, err < 1e-5 and dt < 30,
                   f"rel. inf-norm error {err:.2e} (< 1e-5), runtime {dt:.1f}s (< 30s)")


# 7 ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def optimisation_run(restart: str):
    return optimise(OptimisationConfig(method="CR", restart=restart))


def criterion_7() -> bool:
    warm, cold = optimisation_run("warm"), optimisation_run("cold")
    hist = warm.history
    conv = all(
        r.primal_cause == r.adjoint_cause == Termination.Converged.value
        and r.primal_cycles < 100 and r.adjoint_cycles < 100
        for r in hist
    )
    wp, wa = total_cycles(warm)
    cp, ca = total_cycles(cold)
    a = wp + wa <= cp + ca
    b = wa >= wp
    vol = max(r.volume for r in hist)
    c = vol <= 0.5 + 1e-9
    detail = (
        f"{len(hist)} cycles, all solves converged in < 100: {conv} "
        f"(max {max(max(r.primal_cycles, r.adjoint_cycles) for r in hist)}); "
        f"warm total {wp + wa} <= cold total {cp + ca}: {a}; "
        f"adjoint {wa} >= primal {wp}: {b}; max volume {vol:.12f} (<= 0.5 + 1e-9): {c}"
    )
    return _record(7, conv and a and b and c and warm.converged, detail)


# 8 ---------------------------------------------------------------------------


def _restriction_bitwise() -> bool:
    g = SpaceTimeGrid(1.0, 1.0, 32, 32)
    for d, m in [(X, "C"), (T, "C"), (F, "C"), (X, "B"), (T, "B")]:
        tp = build_transfer(g, coarsen_grid(g, d), d, InterpolationMethod(m))
        if not np.array_equal(tp.R.toarray(), (tp.s * tp.P.T).toarray()):
            return False
    return True


def _causal_support() -> bool:
    g = SpaceTimeGrid(1.0, 1.0, 16, 16)
    for d in (T, F):
        c = coarsen_grid(g, d)
        P = build_transfer(g, c, d, InterpolationMethod.Causal).P.tocoo()
        if np.any(P.row // g.n_nodes < 2 * (P.col // c.n_nodes)):
            return False
    return True


def _vcycle_linear() -> float:
    worst = 0.0
    rng = np.random.default_rng(8)
    prob = get_problem(7)
    g, chi = prob.build(64, 64)
    for m in ALL_METHODS:
        h = build_hierarchy(g, m, _contrast_path(g, chi, prob.mat, m, 5), chi, prob.mat)
        u, b = rng.normal(size=g.n_dofs), rng.normal(size=g.n_dofs)
        a = v_cycle(h, 0, u, b, SolverConfig())
        s = v_cycle(h, 0, 2.5 * u, 2.5 * b, SolverConfig())
        worst = max(worst, float(np.max(np.abs(s - 2.5 * a)) / np.max(np.abs(s))))
    return worst


def _simp_fd() -> float:
    chi = np.linspace(0.05, 0.95, 20)
    dk, dc = simp_derivatives(chi, ALUMINIUM_EPOXY)
    kp, cp = simp_eval(chi + 1e-6, ALUMINIUM_EPOXY)
    km, cm = simp_eval(chi - 1e-6, ALUMINIUM_EPOXY)
    return float(max(np.max(np.abs((kp - km) / 2e-6 / dk - 1)), np.max(np.abs((cp - cm) / 2e-6 / dc - 1))))


def _time_steps_increase() -> bool:
    for p in range(1, 10):
        prob = get_problem(p)
        g, chi = prob.build(64, 64)
        for m in ALL_METHODS:
            r = m.reassembly
            path = _contrast_path(g, chi, prob.mat, m, 7)
            grid, chi_l = g, chi if r.name == "D" else None
            lam = effective_lambda(grid).lambda_eff
            for d in path.directions:
                k, c, chi_l = coarsen_materials(grid, d, r, chi_l, prob.mat)
                grid = coarsen_grid(grid, d).with_materials(k, c)
                nxt = effective_lambda(grid).lambda_eff
                if d is T and not nxt > lam:
                    return False
                lam = nxt
    return True


def _design_independent_fixed() -> bool:
    seen = []
    cfg = OptimisationConfig(N_el=32, N_t=32, N_l=4, max_cycles=8)
    state = optimise(cfg, callback=lambda s: seen.append(s.path))
    rng = np.random.default_rng(3)
    bare = SpaceTimeGrid(cfg.L, cfg.t_T, 32, 32)
    others = [
        plan_coarsening(bare.with_materials(*simp_eval(rng.uniform(0, 1, 32), cfg.mat)), cfg.N_l,
                        mode=DesignIndependent(cfg.mat))
        for _ in range(3)
    ]
    return all(p is state.path for p in seen) and all(o == state.path for o in others)


def criterion_8() -> bool:
    checks = {
        "R = s P^T bitwise": _restriction_bitwise(),
        "causal P support": _causal_support(),
    }
    lin = _vcycle_linear()
    checks[f"V-cycle linearity {lin:.1e} <= 1e-12"] = lin <= 1e-12
    sfd = _simp_fd()
    checks[f"SIMP derivative FD {sfd:.1e} < 1e-8"] = sfd < 1e-8
    checks["t-steps increase lam_eff"] = _time_steps_increase()
    checks["design-independent path fixed"] = _design_independent_fixed()
    ok = all(checks.values())
    return _record(8, ok, "; ".join(f"{k}: {v}" for k, v in checks.items()))


# pytest entry points ---------------------------------------------------------


def test_criterion_1_oracle_equivalence():
    assert criterion_1(), ACCEPTANCE_LINES[1]


def test_criterion_2_uniform_two_grid_sweep():
    assert criterion_2(), ACCEPTANCE_LINES[2]


def test_criterion_3_contrast_crossovers():
    assert criterion_3(), ACCEPTANCE_LINES[3]


def test_criterion_4_bp_instability():
    assert criterion_4(), ACCEPTANCE_LINES[4]


def test_criterion_5_problem8_ordering():
    assert criterion_5(), ACCEPTANCE_LINES[5]


def test_criterion_6_adjoint_gradient():
    assert criterion_6(), ACCEPTANCE_LINES[6]


def test_criterion_7_optimisation_robustness():
    assert criterion_7(), ACCEPTANCE_LINES[7]


def test_criterion_8_structural_invariants():
    assert criterion_8(), ACCEPTANCE_LINES[8]


if __name__ == "__main__":
    results = [globals()[f"criterion_{n}"]() for n in range(1, 9)]
    sys.exit(0 if all(results) else 1)
