"""Command-line interface.

    confgeo check <file> [--json] [--out PATH] [--dump-invariants]
                  [--i4-variant intro|connection] [--d2w3-variant a|b]
                  [--seed N] [--oracle] [--numeric-only] [--timings]

Exit codes: 0 = conformal, 1 = not conformal, 2 = input error.
"""
from __future__ import annotations

import argparse
import sys as _sys
import time

from .conditions import CheckConfig, check_conformal
from .oracle import numeric_circle_oracle
from .parser import ParseError, load_system_file
from .report import build_report, render_text, to_json


def _build_argparser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="confgeo",
                                 description="conformal-geodesics checker for "
                                             "third-order ODE systems")
    sub = ap.add_subparsers(dest="command", required=True)
    chk = sub.add_parser("check", help="check a system definition file")
    chk.add_argument("file", help="system definition file (.ode)")
    chk.add_argument("--json", action="store_true", help="machine-readable report")
    chk.add_argument("--out", metavar="PATH", help="write the report to PATH")
    chk.add_argument("--dump-invariants", action="store_true",
                     help="include serialized invariants in the report")
    chk.add_argument("--i4-variant", choices=("intro", "connection"),
                     default="connection")
    chk.add_argument("--d2w3-variant", choices=("a", "b"), default="a")
    chk.add_argument("--seed", type=int, default=0)
    chk.add_argument("--oracle", action="store_true",
                     help="also run the numeric circle oracle")
    chk.add_argument("--numeric-only", action="store_true",
                     help="randomized zero tests only; verdict becomes 'probable'")
    chk.add_argument("--timings", action="store_true",
                     help="include wall-clock timings (non-deterministic output)")
    return ap


def run_check(argv) -> int:
    ap = _build_argparser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        sysfile = load_system_file(args.file)
        system = sysfile.system()
    except (OSError, ParseError, ValueError) as exc:
        print(f"confgeo: error: {exc}", file=_sys.stderr)
        return 2

    cfg = CheckConfig(
        i4_variant=args.i4_variant,
        d2w3_variant=args.d2w3_variant,
        zero_mode="randomized" if args.numeric_only else "exact",
        seed=args.seed,
    )
    timings: dict = {}
    t0 = time.perf_counter()
    verdict = check_conformal(system, cfg)
    timings["check"] = time.perf_counter() - t0

    oracle_dict = None
    if args.oracle:
        t1 = time.perf_counter()
        oracle_dict = numeric_circle_oracle(system, seed=args.seed).as_dict()
        timings["oracle"] = time.perf_counter() - t1

    report = build_report(system, verdict, cfg,
                          name=sysfile.name, source=args.file, rhs=sysfile.rhs,
                          include_invariants=args.dump_invariants,
                          oracle=oracle_dict,
                          timings=timings if args.timings else None)
    text = to_json(report) if args.json else render_text(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        _sys.stdout.write(text)
    return 0 if verdict.conformal else 1


def main() -> None:
    _sys.exit(run_check(_sys.argv[1:]))


if __name__ == "__main__":
    main()
