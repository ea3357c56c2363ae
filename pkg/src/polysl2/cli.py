"""Command-line entry point.

Subcommands: ``spectrum``, ``dynamics``, ``compare``, ``sweep``.  Exit
codes: 0 success, 2 configuration/validation error, 3 numeric failure in
every requested sector, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import sys

from .errors import IoError, ParseError, PolySL2Error, ValidationError
from .runio import (cmd_compare, cmd_dynamics, cmd_spectrum, cmd_sweep,
                    parse_config, serialize, write_output)

_COMMANDS = {
    "spectrum": cmd_spectrum,
    "dynamics": cmd_dynamics,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polysl2",
        description="Exact and coherent-state variational spectra and "
                    "dynamics for polynomially deformed sl(2) models.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to INI or JSON config")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--method", default=None,
                       help="space/comma separated method list override")
        p.add_argument("--root-policy", choices=("min-delta2", "min-ground"),
                       default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--seed", type=int, default=None,
                       help="seed for randomized initial states")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 4
    try:
        cfg = parse_config(text)
        if args.method:
            cfg.methods = tuple(args.method.replace(",", " ").split())
        if args.root_policy:
            cfg.root_policy = args.root_policy
        if args.tol is not None:
            cfg.tol = args.tol
            cfg.dynamics["tol"] = args.tol
        if args.format:
            cfg.out_format = args.format
        if args.out:
            cfg.out_path = args.out
        if args.seed is not None:
            cfg.seed = args.seed
        table = _COMMANDS[args.command](cfg)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PolySL2Error as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if table.jobs and table.failures == table.jobs:
        print("error: every requested sector failed", file=sys.stderr)
        sys.stdout.write(serialize(table, cfg.out_format, cfg.precision))
        return 3
    try:
        if cfg.out_path:
            write_output(table, cfg.out_format, cfg.out_path, cfg.precision)
        else:
            sys.stdout.write(serialize(table, cfg.out_format, cfg.precision))
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
