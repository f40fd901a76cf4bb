"""Command line entry point: ``farfield <command> --config cfg.yaml``.

Exit codes: 0 success, 1 configuration error, 2 runtime or numerical
error, 3 verification-suite failure.
"""
from __future__ import annotations

import argparse
import sys

from ..errors import ConfigError, FarfieldError
from . import experiments as ex
from .config import load_config

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


def _parser():
    parser = argparse.ArgumentParser(prog="farfield", description="Far-field kernel compression experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in [
        ("compress", "row-subsampled compression sweep"),
        ("spectra", "normalized singular values of K"),
        ("interactions", "self / nearest / far norm fractions"),
        ("bandwidth-search", "Gaussian bandwidth meeting a rank budget"),
        ("verify", "empirical checks of the error bounds"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="YAML config file (defaults apply when omitted)")
        p.add_argument("--seed", type=int, help="master seed override")
        p.add_argument("--out", help="output CSV path (stdout when absent)")
        p.add_argument("--trials", type=int, help="trial count override")
        if name == "verify":
            p.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    return parser


def _emit(rows, columns, out):
    text = ex.write_csv(rows, columns, out)
    if out is None:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed, trials=args.trials, output=args.out)
        if args.command == "verify" and args.trials is not None:
            cfg = cfg.model_copy(update={"verify": cfg.verify.model_copy(update={"trials": args.trials})})
        if args.command == "verify" and args.suite:
            unknown = sorted(set(args.suite) - set(ex.SUITES))
            if unknown:
                raise ConfigError(f"unknown suite(s): {', '.join(unknown)}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = cfg.output
    try:
        if args.command == "compress":
            _emit(ex.run_experiment(cfg), ex.COMPRESS_COLUMNS, out)
        elif args.command == "spectra":
            _emit(ex.spectra_report(cfg), ex.SPECTRA_COLUMNS, out)
        elif args.command == "interactions":
            _emit(ex.interactions_report(cfg), ex.INTERACTION_COLUMNS, out)
        elif args.command == "bandwidth-search":
            _emit(ex.bandwidth_report(cfg), ex.BANDWIDTH_COLUMNS, out)
        else:
            results, ok = ex.verify_command(cfg, args.suite)
            _emit([r.row() for r in results], ex.VERIFY_COLUMNS, out)
            for r in results:
                print(f"{r.suite}: {'PASS' if r.passed else 'FAIL'}", file=sys.stderr)
            if not ok:
                return EXIT_VERIFY
    except (FarfieldError, ArithmeticError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
