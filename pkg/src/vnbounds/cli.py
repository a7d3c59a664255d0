"""Command line entry point: ``vnbounds <subcommand> [options]``.

Exit status is 0 on success, 2 when a size budget is exceeded, 1 on I/O
errors and 3 when ``verify`` finds a value that does not recompute.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .core import BudgetError, poly_from_matrix
from .experiments import (
    ExperimentConfig,
    emit_report,
    load_report,
    norm_report,
    run_balpha_scan,
    run_fj_sweep,
    run_random_search,
    run_sign_table,
    verify_report,
)
from .serialize import matrix_from_json, poly_from_json

EXIT_OK, EXIT_IO, EXIT_BUDGET, EXIT_VERIFY = 0, 1, 2, 3


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resolution", type=int, default=None, help="torus grid points per axis")
    p.add_argument("--multistarts", type=int, default=32, help="torus refinement starts")
    p.add_argument("--gram-multistarts", type=int, default=64)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", "-o", default=None, help="output file (default: stdout)")
    p.add_argument("--no-annotate", action="store_true", help="omit reference constants from JSON")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vnbounds", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("norm", help="sup norm of one polynomial on the torus")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--poly", help="polynomial JSON file")
    src.add_argument("--matrix", help="coefficient matrix as a JSON literal, e.g. '[[1,-1],[-1,1]]'")
    _common(p)

    p = sub.add_parser("sign-table", help="the six 3x3 sign-matrix representatives")
    _common(p)

    p = sub.add_parser("fj", help="Gram/sign ratios of the A_k family")
    p.add_argument("--kmax", type=int, default=4)
    _common(p)

    p = sub.add_parser("balpha", help="scan of the B_alpha family")
    p.add_argument("--min", type=float, default=-3.0, dest="amin")
    p.add_argument("--max", type=float, default=-0.05, dest="amax")
    p.add_argument("--steps", type=int, default=60)
    _common(p)

    p = sub.add_parser("search", help="random search for large von Neumann ratios")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--mode", choices=("sign", "uniform", "mixed"), default="mixed")
    p.add_argument("--refine", type=int, default=0, help="hill-climbing steps on the best matrix")
    _common(p)
    p.set_defaults(multistarts=8, gram_multistarts=8)

    p = sub.add_parser("verify", help="recompute every value in a JSON report from its witnesses")
    p.add_argument("report")
    return ap


def _config(args) -> ExperimentConfig:
    return ExperimentConfig(
        seed=args.seed,
        resolution=args.resolution,
        multistarts=args.multistarts,
        gram_multistarts=args.gram_multistarts,
        trials=getattr(args, "trials", 1000),
        format=args.format,
        output=args.output,
        annotate=not args.no_annotate,
    )


def _run(args) -> int:
    if args.command == "verify":
        checks = verify_report(load_report(args.report))
        for c in checks:
            print(f"{'ok  ' if c.ok else 'FAIL'} {c.name}: reported {c.reported:.12g}, recomputed {c.recomputed:.12g}")
        return EXIT_OK if all(c.ok for c in checks) else EXIT_VERIFY

    cfg = _config(args)
    if args.command == "norm":
        if args.poly:
            with open(args.poly) as f:
                p = poly_from_json(json.load(f))
        else:
            p = poly_from_matrix(matrix_from_json(json.loads(args.matrix)))
        report = norm_report(p, cfg)
    elif args.command == "sign-table":
        report = run_sign_table(cfg)
    elif args.command == "fj":
        report = run_fj_sweep(args.kmax, cfg)
    elif args.command == "balpha":
        report = run_balpha_scan(args.amin, args.amax, args.steps, cfg)
    elif args.command == "search":
        report = run_random_search(args.n, args.m, args.trials, args.seed, args.mode, args.refine, cfg)
    else:  # pragma: no cover - argparse rejects unknown commands
        raise AssertionError(args.command)

    text = emit_report(report, cfg.format, cfg.output, cfg)
    if cfg.output is None:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    np.seterr(all="ignore")
    try:
        return _run(args)
    except BudgetError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
