"""``stmg run <experiment> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from stmg.experiments import (
    EXPERIMENTS,
    ExperimentConfig,
    coerce_fields,
    read_config_file,
    run_experiment,
)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stmg", description="Space-time multigrid experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one experiment and write CSV output")
    run.add_argument("experiment", choices=EXPERIMENTS)
    run.add_argument("--config", help="INI file with an [experiment] section")
    run.add_argument("--problem", dest="problems", help="preset number(s), comma separated")
    run.add_argument("--methods", help="comma separated, e.g. CK,CR,BP")
    run.add_argument("--method", help="single method; same as --methods with one entry")
    run.add_argument("--levels", help="level range, e.g. 2..10")
    run.add_argument("--restart", dest="restarts", help="warm, cold or warm,cold")
    run.add_argument("--nu", help="smoothing steps per half cycle")
    run.add_argument("--N-el", dest="N_el", help="fine spatial elements")
    run.add_argument("--N-t", dest="N_t", help="fine time steps")
    run.add_argument("--step", dest="step_log2", help="log2 spacing of the t_T sweep")
    run.add_argument("--diagnostics", action="store_const", const="true",
                     help="add alternative lambda_eff columns to contrast-sweep")
    run.add_argument("--out", help="output directory (default: results)")
    run.add_argument("-v", "--verbose", action="store_true")
    return ap


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Config file first, command-line flags on top."""
    fields = {}
    if args.config:
        fields.update(coerce_fields(read_config_file(args.config)))
    flags = {k: getattr(args, k) for k in
             ("problems", "methods", "levels", "restarts", "nu", "N_el", "N_t",
              "step_log2", "diagnostics", "out")}
    if args.method:
        if args.methods:
            raise ValueError("give either --method or --methods, not both")
        flags["methods"] = args.method
    fields.update(coerce_fields(flags))
    file_exp = fields.pop("experiment", None)
    if file_exp is not None and file_exp != args.experiment:
        logging.getLogger(__name__).warning(
            "config file names experiment %r; running %r", file_exp, args.experiment)
    return ExperimentConfig(experiment=args.experiment, **fields)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
    except (ValueError, TypeError) as err:
        print(f"stmg: config error: {err}", file=sys.stderr)
        return 2
    for p in run_experiment(cfg):
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
