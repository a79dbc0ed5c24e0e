"""Machine-readable and human-readable check reports.

The JSON document is deterministic for identical input and flags: random
draws are seeded, and timings are only included on request (``timings`` is
null otherwise).  `json.loads(json.dumps(report))` round-trips exactly.
"""
from __future__ import annotations

import json
import random
from fractions import Fraction

from . import __version__ as _fallback_version
from .conditions import CheckConfig, Verdict, i4_det
from .expr import PoleError, SamplePoint, eval_exact, random_sample_point, serialize
from .invariants import (h_fields, invariant_I2, invariant_I4, invariant_W2,
                         invariant_W3)
from .jet import OdeSystem

SCHEMA = "confgeo.report/1"


def _frac(v: Fraction) -> str:
    return str(v)


def _point_dict(pt: SamplePoint) -> dict:
    return {name: _frac(v) for name, v in pt.as_dict().items()}


def _witness_dict(w) -> dict | None:
    if w is None:
        return None
    return {"entry": list(w.entry), "point": _point_dict(w.point), "value": _frac(w.value)}


def _field_dump(field) -> object:
    def go(entries):
        if isinstance(entries, tuple):
            return [go(e) for e in entries]
        return serialize(entries)
    return go(field.entries)


def rank_sampling(sys: OdeSystem, cfg: CheckConfig, n_points: int = 10) -> dict:
    """det(I4) evaluated at seeded random points; lists any vanishing ones."""
    det = i4_det(sys, cfg)
    rng = random.Random(cfg.seed + 2)
    values = []
    vanishing = []
    found = 0
    attempts = 0
    while found < n_points and attempts < 40 * n_points:
        attempts += 1
        pt = random_sample_point(sys.m, rng)
        try:
            v = eval_exact(det, pt)
        except PoleError:
            continue
        found += 1
        rec = {"point": _point_dict(pt), "value": _frac(v)}
        values.append(rec)
        if v == 0:
            vanishing.append(rec)
    return {"det_values": values, "vanishing_points": vanishing,
            "note": "pass certifies generically non-degenerate; "
                    "'everywhere' is domain-dependent"}


def build_report(sys: OdeSystem, verdict: Verdict, cfg: CheckConfig,
                 name: str | None = None, source: str | None = None,
                 rhs: tuple | None = None,
                 include_invariants: bool = False,
                 oracle: dict | None = None,
                 timings: dict | None = None,
                 tool_version: str | None = None) -> dict:
    conditions = []
    for c in verdict.conditions:
        entry = {"id": c.id, "passed": c.passed, "witness": _witness_dict(c.witness)}
        conditions.append(entry)
    report = {
        "schema": SCHEMA,
        "tool_version": tool_version or _fallback_version,
        "system": {
            "m": sys.m,
            "name": name,
            "source": source,
            "rhs": list(rhs) if rhs is not None else [serialize(e) for e in sys.f],
        },
        "config": {
            "i4_variant": cfg.i4_variant,
            "h2_reading": cfg.h2_reading,
            "d2w3_variant": cfg.d2w3_variant,
            "w3_cube": cfg.w3_cube,
            "zero_mode": cfg.zero_mode,
            "seed": cfg.seed,
        },
        "verdict": {
            "conformal": verdict.conformal,
            "mode": verdict.mode,
            "summary": verdict.summary,
            "failing": verdict.failing,
        },
        "conditions": conditions,
        "rank": rank_sampling(sys, cfg),
        "ledger": verdict.variant_ledger,
        "invariants": None,
        "oracle": oracle,
        "timings": timings,
    }
    if include_invariants:
        Hx, Hm1 = h_fields(sys)
        report["invariants"] = {
            "Hx": _field_dump(Hx),
            "Hm1": _field_dump(Hm1),
            "I2": _field_dump(invariant_I2(sys)),
            "W2": _field_dump(invariant_W2(sys)),
            "W3": _field_dump(invariant_W3(sys, cfg.w3_cube)),
            "I4": _field_dump(invariant_I4(sys, cfg.i4_variant, cfg.h2_reading)),
            "det_I4": serialize(i4_det(sys, cfg)),
        }
    return report


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2) + "\n"


def render_text(report: dict) -> str:
    lines = []
    sysinfo = report["system"]
    title = sysinfo["name"] or "system"
    lines.append(f"confgeo check: {title} (m={sysinfo['m']})")
    for i, rhs in enumerate(sysinfo["rhs"], start=1):
        lines.append(f"  f{i} = {rhs}")
    lines.append("")
    for c in report["conditions"]:
        status = "pass" if c["passed"] else "FAIL"
        line = f"  condition {c['id']:>4}: {status}"
        if c["witness"]:
            w = c["witness"]
            where = ",".join(str(i) for i in w["entry"])
            if c["id"] == "rank":
                line += f"  [det != 0 at a sample point: value {w['value']}]"
            else:
                line += f"  [witness: entry ({where}) value {w['value']}]"
        lines.append(line)
    rank = report["rank"]
    nvan = len(rank["vanishing_points"])
    lines.append(f"  det(I4) sampling: {len(rank['det_values'])} points, "
                 f"{nvan} vanishing")
    lines.append("")
    v = report["verdict"]
    word = "CONFORMAL" if v["conformal"] else "NOT CONFORMAL"
    if v["mode"] == "probable":
        word += " (probable)"
    lines.append(f"verdict: {word}")
    lines.append(f"  {v['summary']}")
    led = report["ledger"]
    if led:
        lines.append("")
        lines.append("formula-reading ledger:")
        for k, val in led.items():
            lines.append(f"  {k}: {val}")
    if report.get("oracle"):
        o = report["oracle"]
        lines.append("")
        lines.append(f"numeric circle oracle: {'pass' if o['passed'] else 'fail'} "
                     f"({o['n_completed']} trajectories completed, {o['n_skipped']} skipped, "
                     f"tolerance {o['tolerance']:g})")
    if report.get("timings"):
        lines.append("")
        lines.append("timings (s): " + ", ".join(f"{k}={v:.3f}" for k, v in report["timings"].items()))
    return "\n".join(lines) + "\n"
