"""Convergence studies and the optimisation run, written out as CSV."""

from __future__ import annotations

import configparser
import csv
import dataclasses
import json
import logging
from pathlib import Path

import numpy as np

from stmg.mesh import CoarseningDirection
from stmg.multigrid import SolverConfig, build_hierarchy, mg_solve
from stmg.optimisation import OptimisationConfig, optimise
from stmg.problems import get_problem, sweep_t_T
from stmg.rediscretisation import ALL_METHODS, RediscretisationMethod
from stmg.strategy import (
    CoarseningPath,
    Contrast,
    Resolution,
    effective_lambda,
    lambda_eff_candidates,
    plan_coarsening,
)

log = logging.getLogger(__name__)

EXPERIMENTS = ("anisotropy-sweep", "contrast-sweep", "levels-sweep", "feature-sweep", "optimise")

RESULT_COLUMNS = ["experiment", "problem", "method", "convergence_factor", "cycles", "cause"]


@dataclasses.dataclass
class ExperimentConfig:
    experiment: str
    problems: list[int] | None = None
    methods: list[str] | None = None
    levels: tuple[int, int] = (2, 10)
    out: str = "results"
    nu: int | None = None
    lambda_crit: float = 0.25
    N_el: int = 256
    N_t: int = 256
    step_log2: float = 0.25  # contrast-sweep t_T spacing
    t_T_exponents: tuple[int, int] = (-18, 2)  # anisotropy-sweep, powers of 2
    feature_n: tuple[int, int] = (6, 24)  # F = 2^(-n/3)
    feature_M: tuple[int, ...] = (8, 16, 32, 64, 128)
    feature_levels: int = 6
    restarts: tuple[str, ...] = ("warm", "cold")
    diagnostics: bool = False  # add the rejected lambda_eff candidates as columns

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        for p in self.problems or []:
            get_problem(p)
        for m in self.methods or []:
            RediscretisationMethod.parse(m)
        for r in self.restarts:
            if r not in ("warm", "cold"):
                raise ValueError(f"restart mode must be warm or cold, got {r!r}")
        lo, hi = self.levels
        if not 1 <= lo <= hi:
            raise ValueError(f"invalid level range {self.levels}")

    def resolved(self) -> dict:
        d = dataclasses.asdict(self)
        d["problems"] = self.problem_list()
        d["methods"] = self.method_list()
        d["nu"] = self.smoothing_steps()
        return d

    def problem_list(self) -> list[int]:
        if self.problems:
            return list(self.problems)
        return {
            "anisotropy-sweep": [0],
            "contrast-sweep": [1, 2, 3, 4, 5, 6],
            "levels-sweep": [7, 8, 9],
            "feature-sweep": [8],
            "optimise": [7],
        }[self.experiment]

    def method_list(self) -> list[str]:
        if self.methods:
            return [m.upper() for m in self.methods]
        return {
            "anisotropy-sweep": ["CK"],
            "contrast-sweep": ["CK"],
            "levels-sweep": [m.name for m in ALL_METHODS],
            "feature-sweep": ["CK", "CR"],
            "optimise": ["BR", "CR", "CP"],
        }[self.experiment]

    def smoothing_steps(self) -> int:
        if self.nu is not None:
            return self.nu
        return 20 if self.experiment in ("feature-sweep", "optimise") else 5


_INT_PAIRS = ("levels", "t_T_exponents", "feature_n")


def parse_range(text: str) -> tuple[int, int]:
    """``"2..10"`` or ``"2,10"`` or ``"6"``."""
    for sep in ("..", ","):
        if sep in text:
            a, b = text.split(sep)
            return int(a), int(b)
    return int(text), int(text)


def _list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def coerce_fields(raw: dict) -> dict:
    """Convert string values (from a config file or CLI) to field types."""
    out = {}
    for key, val in raw.items():
        if val is None:
            continue
        if not isinstance(val, str):
            out[key] = val
        elif key in _INT_PAIRS:
            out[key] = parse_range(val)
        elif key == "problems":
            out[key] = [int(v) for v in _list(val)]
        elif key == "methods":
            out[key] = _list(val)
        elif key in ("restarts",):
            out[key] = tuple(_list(val))
        elif key == "feature_M":
            out[key] = tuple(int(v) for v in _list(val))
        elif key in ("nu", "N_el", "N_t", "feature_levels"):
            out[key] = int(val)
        elif key in ("lambda_crit", "step_log2"):
            out[key] = float(val)
        elif key == "diagnostics":
            out[key] = val.strip().lower() in ("1", "true", "yes", "on")
        elif key in ("experiment", "out"):
            out[key] = val.strip()
        else:
            raise ValueError(f"unknown config key {key!r}")
    return out


def read_config_file(path) -> dict:
    """Read the ``[experiment]`` section of an INI-style key = value file."""
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if not cp.read(path):
        raise ValueError(f"cannot read config file {path}")
    if "experiment" not in cp:
        raise ValueError(f"{path}: missing [experiment] section")
    return dict(cp["experiment"])


# CSV -------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path: Path, columns, rows, cfg: ExperimentConfig):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write("# config: " + json.dumps(cfg.resolved(), sort_keys=True) + "\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])
    log.info("wrote %s (%d rows)", path, len(rows))
    return path


def _solve(grid, chi, mat, method, path, solver):
    h = build_hierarchy(grid, method, path, chi, mat)
    _, rep = mg_solve(h, cfg=solver)
    return rep


def _result(rep) -> dict:
    return {
        "convergence_factor": float(rep.convergence_factor),
        "cycles": rep.cycles,
        "cause": rep.cause.value,
    }


def crossover_log2(log2_lam, f_x, f_t) -> list[float]:
    """Linearly interpolated log2(lambda) values where the x and t factor curves cross."""
    a = np.asarray(log2_lam, dtype=np.float64)
    s = np.asarray(f_x) - np.asarray(f_t)
    out = []
    for i in range(len(s) - 1):
        if s[i] == 0:
            out.append(float(a[i]))
        elif s[i] * s[i + 1] < 0:
            out.append(float(a[i] + (a[i + 1] - a[i]) * s[i] / (s[i] - s[i + 1])))
    return out


# Experiments -----------------------------------------------------------------


def anisotropy_sweep(cfg: ExperimentConfig):
    """Two-grid factors for x, t and full coarsening on uniform material."""
    solver = SolverConfig(nu=cfg.smoothing_steps())
    rows = []
    for pnum in cfg.problem_list():
        prob = get_problem(pnum)
        lo, hi = cfg.t_T_exponents
        for e in range(lo, hi + 1):
            grid, chi = prob.build(cfg.N_el, cfg.N_t, t_T=2.0**e)
            lam = effective_lambda(grid).lambda_eff
            for name in cfg.method_list():
                method = RediscretisationMethod.parse(name)
                for d in CoarseningDirection:
                    if d is CoarseningDirection.FullST and method.interp.value != "C":
                        continue
                    rep = _solve(grid, chi, prob.mat, method, CoarseningPath((d,)), solver)
                    rows.append(
                        {"experiment": cfg.experiment, "problem": pnum, "method": name,
                         "coarsening": d.value, "t_T": 2.0**e, "lambda": lam, **_result(rep)}
                    )
    cols = RESULT_COLUMNS[:3] + ["coarsening", "t_T", "lambda"] + RESULT_COLUMNS[3:]
    return [write_csv(Path(cfg.out) / "anisotropy_sweep.csv", cols, rows, cfg)]


def contrast_sweep(cfg: ExperimentConfig):
    """Two-grid x- and t-coarsening factors against lambda_eff for problems 1-6."""
    solver = SolverConfig(nu=cfg.smoothing_steps())
    rows, summary = [], []
    extra: list[str] = []
    for pnum in cfg.problem_list():
        prob = get_problem(pnum)
        for name in cfg.method_list():
            method = RediscretisationMethod.parse(name)
            curve = {"x": [], "t": [], "lam": []}
            for t_T in sweep_t_T(prob, cfg.step_log2):
                grid, chi = prob.build(cfg.N_el, cfg.N_t, t_T=t_T)
                lam = effective_lambda(grid).lambda_eff
                cand = lambda_eff_candidates(grid) if cfg.diagnostics else {}
                extra = sorted(cand)
                curve["lam"].append(np.log2(lam))
                for d in (CoarseningDirection.SpaceX, CoarseningDirection.TimeT):
                    rep = _solve(grid, chi, prob.mat, method, CoarseningPath((d,)), solver)
                    curve[d.value].append(rep.convergence_factor)
                    rows.append(
                        {"experiment": cfg.experiment, "problem": pnum, "method": name,
                         "coarsening": d.value, "t_T": float(t_T), "lambda_eff": lam,
                         **{f"cand_{k}": v for k, v in cand.items()}, **_result(rep)}
                    )
            for x in crossover_log2(curve["lam"], curve["x"], curve["t"]) or [float("nan")]:
                summary.append({"experiment": cfg.experiment, "problem": pnum,
                                "method": name, "crossover_log2_lambda_eff": x})
    cols = (RESULT_COLUMNS[:3] + ["coarsening", "t_T", "lambda_eff"]
            + [f"cand_{k}" for k in extra] + RESULT_COLUMNS[3:])
    out = Path(cfg.out)
    return [
        write_csv(out / "contrast_sweep.csv", cols, rows, cfg),
        write_csv(out / "contrast_crossovers.csv",
                  ["experiment", "problem", "method", "crossover_log2_lambda_eff"], summary, cfg),
    ]


def levels_sweep(cfg: ExperimentConfig):
    """Factor against number of levels for each rediscretisation method."""
    solver = SolverConfig(nu=cfg.smoothing_steps())
    rows = []
    lo, hi = cfg.levels
    for pnum in cfg.problem_list():
        prob = get_problem(pnum)
        grid, chi = prob.build(cfg.N_el, cfg.N_t)
        for name in cfg.method_list():
            method = RediscretisationMethod.parse(name)
            for n_l in range(lo, hi + 1):
                path = plan_coarsening(grid, n_l, cfg.lambda_crit, Contrast(),
                                       method.reassembly, chi, prob.mat)
                rep = _solve(grid, chi, prob.mat, method, path, solver)
                rows.append({"experiment": cfg.experiment, "problem": pnum, "method": name,
                             "levels": n_l, "path": path.to_text(), **_result(rep)})
    cols = RESULT_COLUMNS[:3] + ["levels", "path"] + RESULT_COLUMNS[3:]
    return [write_csv(Path(cfg.out) / "levels_sweep.csv", cols, rows, cfg)]


def feature_sweep(cfg: ExperimentConfig):
    """Insulating-gap width sweep with the minimum-resolution strategy."""
    solver = SolverConfig(nu=cfg.smoothing_steps())
    rows = []
    lo, hi = cfg.feature_n
    for pnum in cfg.problem_list():
        prob = get_problem(pnum)
        for n in range(lo, hi + 1):
            F = 2.0 ** (-n / 3)
            grid, chi = prob.build(cfg.N_el, cfg.N_t, F=F)
            for name in cfg.method_list():
                method = RediscretisationMethod.parse(name)
                for M in cfg.feature_M:
                    path = plan_coarsening(grid, cfg.feature_levels, cfg.lambda_crit,
                                           Resolution(M), method.reassembly, chi, prob.mat)
                    rep = _solve(grid, chi, prob.mat, method, path, solver)
                    rows.append({"experiment": cfg.experiment, "problem": pnum, "method": name,
                                 "n": n, "F": F, "M": M, "path": path.to_text(), **_result(rep)})
    cols = RESULT_COLUMNS[:3] + ["n", "F", "M", "path"] + RESULT_COLUMNS[3:]
    return [write_csv(Path(cfg.out) / "feature_sweep.csv", cols, rows, cfg)]


def optimisation_runs(cfg: ExperimentConfig):
    """History, cycle counts and design snapshots for each method and restart mode."""
    out = Path(cfg.out)
    written = []
    for name in cfg.method_list():
        for restart in cfg.restarts:
            ocfg = OptimisationConfig(method=name, restart=restart, nu=cfg.smoothing_steps(),
                                      N_el=cfg.N_el, N_t=cfg.N_t, lambda_crit=cfg.lambda_crit)
            state = optimise(ocfg)
            rows = [
                {"cycle": r.cycle, "theta": r.theta, "volume": r.volume,
                 "primal_cycles": r.primal_cycles, "adjoint_cycles": r.adjoint_cycles,
                 "restart_mode": restart, "method": name}
                for r in state.history
            ]
            cols = ["cycle", "theta", "volume", "primal_cycles", "adjoint_cycles",
                    "restart_mode", "method"]
            written.append(write_csv(out / f"optimise_{name}_{restart}_history.csv", cols, rows, cfg))
            n = len(state.designs)
            picks = sorted({1, *np.linspace(1, n, 6).round().astype(int).tolist(), n})
            snap = {f"cycle_{c}": state.designs[c - 1] for c in picks}
            snap["final"] = state.chi
            rows = [{"element": e, **{k: float(v[e]) for k, v in snap.items()}}
                    for e in range(state.chi.size)]
            written.append(write_csv(out / f"optimise_{name}_{restart}_designs.csv",
                                     ["element", *snap], rows, cfg))
    return written


RUNNERS = {
    "anisotropy-sweep": anisotropy_sweep,
    "contrast-sweep": contrast_sweep,
    "levels-sweep": levels_sweep,
    "feature-sweep": feature_sweep,
    "optimise": optimisation_runs,
}


def run_experiment(cfg: ExperimentConfig) -> list[Path]:
    return RUNNERS[cfg.experiment](cfg)
