#!/usr/bin/env python3
"""Audit the alternative formula readings on the circle corpus.

Prints, for m = 2 and m = 3 circle systems, which I4 variants coincide,
which H^-2 reading is self-consistent, which D_{-2}W3 variant annihilates
condition 7, and whether the two condition-2 printings agree.  This is the
empirical basis for the default configuration frozen into CheckConfig.
"""
from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from confgeo import CheckConfig, check_conformal, load_system_file


def main():
    corpus = Path(__file__).resolve().parents[1] / "corpus"
    for fname in ("circle_m2.ode", "circle_m3.ode"):
        system = load_system_file(corpus / fname).system()
        print(f"== {fname} ==")
        base = check_conformal(system)
        print(f"  default config conformal: {base.conformal}")
        for key, val in base.variant_ledger.items():
            print(f"  {key}: {val}")
        for reading in ("corrected", "literal"):
            for variant in ("a", "b"):
                cfg = CheckConfig(h2_reading=reading, d2w3_variant=variant)
                v = check_conformal(system, cfg, with_ledger=False)
                print(f"  h2={reading:<9} d2w3={variant}: conformal={v.conformal}"
                      + (f" failing={v.failing}" if v.failing else ""))
        print()


if __name__ == "__main__":
    main()
