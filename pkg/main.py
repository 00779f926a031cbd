import argparse
import itertools
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from core.config import Config, ConfigError, ControllerConfig, SubjectConfig, load_config
from gait.bezier import GaitError
from gait.params import fit_gait, fit_header, save_gait
from report.tables import build_report, format_table
from sim.episode import run_episode

logger = logging.getLogger("kneeqp")

# Project errors derive from ValueError or RuntimeError; a pool whose worker died raises a RuntimeError too.
CELL_ERRORS = (ValueError, RuntimeError, ArithmeticError, np.linalg.LinAlgError)


def run_cell(config: Config, subject: SubjectConfig, terrain: str, controller: ControllerConfig, out_dir: str) -> dict:
    """One (subject, terrain, controller) episode, saved as CSV + JSON."""
    log = run_episode(config, subject, terrain, controller)
    log.save(out_dir)
    summary = log.summary()
    return {"name": log.name, "steps": summary["steps"], "fell": summary["fell"], "stance": summary["rmse"]["stance"]}


def _outcomes(config: Config, cells: list, out_dir: str, jobs: int):
    """(cell, result or exception) in grid order; a single job runs in this process."""
    if jobs == 1:
        for cell in cells:
            try:
                yield cell, run_cell(config, *cell, out_dir)
            except CELL_ERRORS as e:
                yield cell, e
        return
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(run_cell, config, *cell, out_dir) for cell in cells]
        for cell, future in zip(cells, futures, strict=True):
            try:
                yield cell, future.result()
            except CELL_ERRORS as e:
                yield cell, e


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    exp = config.experiment
    out_dir = args.out or exp.output_dir
    cells = list(itertools.product(exp.subjects, exp.terrains, exp.controllers))
    print(f"kneeqp: {len(cells)} episode(s), {args.jobs} job(s), writing to {out_dir}")

    failures = 0
    for (s, t, c), result in _outcomes(config, cells, out_dir, args.jobs):
        if isinstance(result, Exception):
            failures += 1
            logger.debug("cell %s/%s/%s", s.name, t, c.kind, exc_info=result)
            print(f"  {s.name}/{t}/{c.kind}: failed: {type(result).__name__}: {result}", file=sys.stderr)
            continue
        status = "fell" if result["fell"] else "ok"
        print(f"  {result['name']}: {result['steps']} steps, {status}, stance RMSE {result['stance']:.4f} rad")
    return 0 if failures == 0 else 1


def cmd_report(args: argparse.Namespace) -> int:
    in_dir = Path(args.in_dir)
    if not in_dir.is_dir():
        print(f"error: no artifact directory {in_dir}", file=sys.stderr)
        return 2
    report = build_report(in_dir, args.out, plots=not args.no_plots)
    print(format_table(report.rows), end="")
    for problem in report.problems:
        print(f"  skipped {problem}", file=sys.stderr)
    return 0


def cmd_fit_gait(args: argparse.Namespace) -> int:
    try:
        gait, residual = fit_gait(args.samples, args.degree)
    except GaitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    save_gait(gait, args.out, fit_header(args.samples, args.degree, residual))
    print(f"wrote {args.out} (residual {residual:.3e})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kneeqp", description="Prosthesis knee controller experiments")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run the subject x terrain x controller grid")
    run.add_argument("--config", default="config/default.toml")
    run.add_argument("--out", default=None, help="artifact directory (default: experiment.output_dir)")
    run.add_argument("--jobs", type=int, default=1)
    run.set_defaults(func=cmd_run)

    report = commands.add_parser("report", help="RMSE tables and plots from run artifacts")
    report.add_argument("--in", dest="in_dir", required=True)
    report.add_argument("--out", required=True)
    report.add_argument("--no-plots", action="store_true")
    report.set_defaults(func=cmd_report)

    fit = commands.add_parser("fit-gait", help="fit Bézier knee coefficients to trajectory samples")
    fit.add_argument("--samples", required=True)
    fit.add_argument("--degree", type=int, default=5)
    fit.add_argument("--out", required=True)
    fit.set_defaults(func=cmd_fit_gait)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
