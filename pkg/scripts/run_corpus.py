#!/usr/bin/env python3
"""Run the checker over every system in corpus/ and print a verdict table.

Usage: python scripts/run_corpus.py [--oracle] [corpus_dir]
"""
from __future__ import annotations

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from confgeo import check_conformal, load_system_file, numeric_circle_oracle
from confgeo.parser import ParseError


def main(argv):
    run_oracle = "--oracle" in argv
    args = [a for a in argv if not a.startswith("--")]
    corpus = Path(args[0]) if args else Path(__file__).resolve().parents[1] / "corpus"
    rows = []
    for path in sorted(corpus.glob("*.ode")):
        try:
            sf = load_system_file(path)
        except ParseError as exc:
            rows.append((path.name, "parse error", "-", "-", str(exc)))
            continue
        system = sf.system()
        t0 = time.perf_counter()
        verdict = check_conformal(system)
        dt = time.perf_counter() - t0
        got = "conformal" if verdict.conformal else "not-conformal"
        expected = sf.expected or "?"
        note = "" if not verdict.failing else f"failing: {','.join(verdict.failing)}"
        if run_oracle:
            rep = numeric_circle_oracle(system, n_trajectories=10)
            note += f"  oracle: {'pass' if rep.passed else 'fail'}"
            note += f" ({rep.n_completed} run, {rep.n_skipped} skipped)"
        ok = "OK" if expected in ("?", got) else "MISMATCH"
        rows.append((path.name, got, expected, f"{dt:.2f}s", f"{ok} {note}".strip()))
    w = max(len(r[0]) for r in rows)
    print(f"{'file':<{w}}  {'verdict':<14} {'expected':<14} {'time':<7} notes")
    for r in rows:
        print(f"{r[0]:<{w}}  {r[1]:<14} {r[2]:<14} {r[3]:<7} {r[4]}")
    bad = [r for r in rows if r[4].startswith("MISMATCH") or r[1] == "parse error"
           and "malformed" not in r[0]]
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
