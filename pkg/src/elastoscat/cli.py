"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import forward
from .cgo import CgoOverflowError, DegenerateConfigurationError, DivergenceError
from .harness import experiments, outputs
from .harness.config import ConfigError, load_config
from .harness.verify import run_verify_suite
from .specfun import SpecialFunctionDomainError

DEFAULT_BASELINE = Path(__file__).parent / "data" / "corner_baseline.json"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4

COMMANDS = {
    "solve": "solve",
    "farfield": "farfield",
    "betti-check": "betti",
    "stability-exp": "stability",
    "corner-exp": "corner",
    "verify": "verify",
}

NUMERIC_ERRORS = (
    forward.SolverError,
    forward.SamplingError,
    forward.FieldDomainError,
    CgoOverflowError,
    DivergenceError,
    DegenerateConfigurationError,
    SpecialFunctionDomainError,
    ArithmeticError,
)


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="elastoscat", description="Elastic corner-scattering experiments")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="TOML configuration file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=_seed, default=None, help="rng seed (u64)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for family sweeps")
        p.add_argument("-v", "--verbose", action="store_true")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    kind = COMMANDS[args.command]
    try:
        cfg = load_config(args.config, kind=kind, seed=args.seed)
    except ConfigError as e:
        for field, msg in e.violations:
            print(f"config error: {field}: {msg}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads < 1:
        print("config error: --threads: must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out or cfg.output_dir
    code = EXIT_OK
    try:
        if kind == "verify":
            summary = run_verify_suite(cfg)
            files = outputs.verify_files(summary, cfg)
            code = EXIT_OK if summary["all_passed"] else EXIT_VERIFY
        elif kind == "solve":
            files = outputs.solve_files(experiments.run_solve(cfg), cfg)
        elif kind == "farfield":
            sol = experiments.run_solve(cfg)
            U = forward.far_field(sol, cfg.directions)
            files = outputs.farfield_files(U, forward.far_field_norm(U), cfg)
        elif kind == "betti":
            res = experiments.run_betti(cfg)
            files = outputs.betti_files(res, cfg)
            for reps in res.reports.values():
                rel = [r.rel_residual for r in reps]
                if rel[-1] > 2e-2 or any(b >= a for a, b in zip(rel, rel[1:])):
                    code = EXIT_VERIFY
        elif kind == "stability":
            res = experiments.run_stability_experiment(cfg, threads=args.threads)
            files = outputs.stability_files(res, cfg)
            if res.fit.get("rank_correlation") != 1.0 or not res.fit.get("gamma", 0) > 0:
                code = EXIT_VERIFY
        else:
            bp = cfg.sweep.get("baseline_path", str(DEFAULT_BASELINE))
            if not os.path.isabs(bp) and args.config:
                bp = os.path.join(os.path.dirname(os.path.abspath(args.config)), bp)
            res = experiments.run_corner_experiment(cfg, threads=args.threads, baseline_path=bp)
            files = outputs.corner_files(res, cfg)
            if not res.passed or res.baseline.get("matches") is False:
                code = EXIT_VERIFY
    except NUMERIC_ERRORS as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    try:
        outputs.emit_outputs(files, out)
    except OSError as e:
        print(f"output error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    return code


def main() -> None:  # pragma: no cover
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
