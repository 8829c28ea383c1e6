"""Command-line entry point: sweeps, figure presets, oracle checks and op counts.

Exit codes: 0 ok, 1 invalid input, 2 runtime failure, 3 a check failed.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import io
import logging
import math
import sys
from typing import List, Optional, Sequence

from .checks import CHECK_NAMES, run_checks
from .complexity import op_counts
from .channel import NormMode
from .errors import ConfigError
from .experiments import COLUMNS, PRESET_NAMES, parse_plan, presets, run_sweep, with_overrides
from .preconditioners import Kind

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_CHECK = 0, 1, 2, 3

log = logging.getLogger("nsprecoding")


def format_field(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return format(v, ".17g")
    return str(v)


def render_csv(rows, timestamp: bool = True) -> str:
    buf = io.StringIO()
    if timestamp:
        buf.write(f"# generated {datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([format_field(row[c]) for c in COLUMNS])
    return buf.getvalue()


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--trials", type=int, default=None, help="Monte Carlo trials per point")
    common.add_argument("--out", default=None, help="output CSV path (default stdout)")
    common.add_argument("--no-timestamp", action="store_true", help="omit the '# generated' header line")
    common.add_argument("--norm-mode", choices=("per", "stat"), default=None)
    common.add_argument("--rho-unit", choices=("linear", "dB"), default=None)
    common.add_argument("--workers", type=int, default=1, help="threads per Monte Carlo batch")
    common.add_argument("-q", "--quiet", action="store_true", help="no per-point log lines")

    p = argparse.ArgumentParser(prog="nsprecoding", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("sweep", parents=[common], help="run a plan file")
    s.add_argument("plan")
    s = sub.add_parser("preset", parents=[common], help="run a figure preset")
    s.add_argument("name", choices=PRESET_NAMES)
    s = sub.add_parser("check", parents=[common], help="run oracle suites")
    s.add_argument("names", nargs="+", help=f"subset of {', '.join(CHECK_NAMES)} (comma or space separated)")
    s = sub.add_parser("complexity", parents=[common], help="print op counts for K")
    s.add_argument("K", type=int)
    return p


def _overrides(args):
    return dict(
        seed=args.seed,
        trials=args.trials,
        rho_unit=args.rho_unit,
        norm_mode=NormMode(args.norm_mode) if args.norm_mode else None,
    )


def _sweep(plans, args) -> int:
    if args.workers < 1:
        raise ConfigError("--workers must be positive")
    rows, failures = run_sweep(plans, parallel_width=args.workers)
    out = args.out or plans[0].out
    _emit(render_csv(rows, timestamp=not args.no_timestamp), out)
    return EXIT_INVALID if failures else EXIT_OK


def _complexity(args) -> int:
    rows = []
    for tag in Kind:
        rep = op_counts(tag, args.K)
        for metric in ("mults", "divs"):
            rows.append(dict(zip(COLUMNS, (tag.value, None, args.K, None, None, None, None, None, None, metric, getattr(rep, metric), None, rep.extrapolated))))
    _emit(render_csv(rows, timestamp=not args.no_timestamp), args.out)
    return EXIT_OK


def _check(args) -> int:
    names: List[str] = [n for arg in args.names for n in arg.split(",") if n]
    results = run_checks(names, trials=args.trials, seed=1 if args.seed is None else args.seed)
    lines = [r.line() for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_CHECK if failed else EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        if args.command == "sweep":
            with open(args.plan, encoding="utf-8") as fh:
                plan = parse_plan(fh.read(), **_overrides(args))
            return _sweep([plan], args)
        if args.command == "preset":
            return _sweep(with_overrides(presets()[args.name], **_overrides(args)), args)
        if args.command == "check":
            return _check(args)
        return _complexity(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, ArithmeticError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
