"""Numeric oracle: integrate trajectories and test the flat-model circle
property (constant curvature, zero torsion of the space curve x -> (x, y)).

Fully independent of the symbolic pipeline: adaptive RK45 at tolerance
1e-12 and 4th-order central differences on a uniform resampling (the
step is chosen to balance stencil truncation against roundoff).  Only
meaningful for candidate flat-model systems; curved-geometry conformal
systems integrate to non-circles.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .expr import to_ratfn
from .jet import OdeSystem
from .poly import Ring


class _PoleOnTrajectory(Exception):
    pass


def make_rhs(sys: OdeSystem):
    """State is (y_1..y_m, p_1..p_m, q_1..q_m); returns du/dx."""
    ring = Ring(sys.m)
    frats = sys.f_ratfns(ring)
    m = sys.m

    def rhs(x, u):
        vals = [0.0] * (3 * m + 1)
        vals[0] = x
        for i in range(3 * m):
            vals[1 + i] = u[i]
        out = np.empty(3 * m)
        out[:m] = u[m:2 * m]
        out[m:2 * m] = u[2 * m:]
        for i, fr in enumerate(frats):
            den = 1.0
            for f, e in fr.den.items():
                fv = f.eval_float(vals)
                if fv == 0.0:
                    raise _PoleOnTrajectory()
                den *= fv ** e
            out[2 * m + i] = fr.num.eval_float(vals) / den
        return out

    return rhs


def integrate_system(sys: OdeSystem, ic, x_span=(0.0, 1.0), samples: int = 251,
                     rtol: float = 1e-12, atol: float = 1e-12):
    """Integrate from ic = (y, p, q) concatenated; returns (xs, ys[N, m]) or
    raises on failure / pole."""
    rhs = make_rhs(sys)
    h = (x_span[1] - x_span[0]) / (samples - 1)
    sol = solve_ivp(rhs, x_span, np.asarray(ic, dtype=float), method="RK45",
                    rtol=rtol, atol=atol, dense_output=True, max_step=h)
    if not sol.success:
        raise RuntimeError(sol.message)
    xs = np.linspace(x_span[0], x_span[1], samples)
    ys = sol.sol(xs)[:sys.m].T
    return xs, ys


def _fd_derivatives(curve: np.ndarray, h: float):
    """4th-order central differences of the sampled curve; trims 3 points
    at each end.  Returns (r1, r2, r3)."""
    c = curve
    r1 = (-c[4:] + 8 * c[3:-1] - 8 * c[1:-3] + c[:-4]) / (12 * h)
    r2 = (-c[4:] + 16 * c[3:-1] - 30 * c[2:-2] + 16 * c[1:-3] - c[:-4]) / (12 * h ** 2)
    s = slice(2, -2)
    r1, r2 = r1[1:-1], r2[1:-1]
    r3 = (c[:-6] - 8 * c[1:-5] + 13 * c[2:-4] - 13 * c[4:-2] + 8 * c[5:-1] - c[6:]) / (8 * h ** 3)
    n = min(len(r1), len(r3))
    return r1[:n], r2[:n], r3[:n]


def curvature_torsion(xs: np.ndarray, ys: np.ndarray):
    """Curvature and (generalized) torsion of the graph curve x -> (x, y(x)).

    kappa = sqrt(G2)/G1^(3/2), tau = sqrt(G3)/G2 with G_k the Gram
    determinants of the first k derivatives; in 3-space these reduce to the
    classical formulas.  Nearly straight samples get tau = 0 (lines are
    limit circles)."""
    h = xs[1] - xs[0]
    curve = np.column_stack([xs, ys])
    r1, r2, r3 = _fd_derivatives(curve, h)
    g11 = np.einsum("ij,ij->i", r1, r1)
    g12 = np.einsum("ij,ij->i", r1, r2)
    g22 = np.einsum("ij,ij->i", r2, r2)
    G2 = g11 * g22 - g12 ** 2
    kappa = np.sqrt(np.maximum(G2, 0.0)) / g11 ** 1.5
    g13 = np.einsum("ij,ij->i", r1, r3)
    g23 = np.einsum("ij,ij->i", r2, r3)
    g33 = np.einsum("ij,ij->i", r3, r3)
    G3 = (g11 * (g22 * g33 - g23 ** 2)
          - g12 * (g12 * g33 - g23 * g13)
          + g13 * (g12 * g23 - g22 * g13))
    tau = np.zeros_like(kappa)
    curved = kappa > 1e-5  # torsion of a nearly straight arc is noise
    tau[curved] = np.sqrt(np.maximum(G3[curved], 0.0)) / G2[curved]
    return kappa, tau


@dataclass(frozen=True)
class OracleTrajectory:
    ic: tuple
    curvature_deviation: float | None
    max_torsion: float | None
    passed: bool
    skipped: bool = False
    reason: str | None = None


@dataclass(frozen=True)
class OracleReport:
    passed: bool
    tolerance: float
    trajectories: tuple
    n_completed: int
    n_skipped: int

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerance": self.tolerance,
            "n_completed": self.n_completed,
            "n_skipped": self.n_skipped,
            "trajectories": [
                {
                    "ic": list(t.ic),
                    "curvature_deviation": t.curvature_deviation,
                    "max_torsion": t.max_torsion,
                    "passed": t.passed,
                    "skipped": t.skipped,
                    "reason": t.reason,
                }
                for t in self.trajectories
            ],
        }


def numeric_circle_oracle(sys: OdeSystem, n_trajectories: int = 20,
                          tolerance: float = 1e-6, seed: int = 0,
                          x_length: float = 1.0, samples: int = 251) -> OracleReport:
    """Integrates random trajectories and tests circle-ness of each."""
    rng = random.Random(seed)
    rows = []
    for _ in range(n_trajectories):
        ic = tuple(rng.uniform(-1.0, 1.0) for _ in range(3 * sys.m))
        try:
            xs, ys = integrate_system(sys, ic, (0.0, x_length), samples)
        except (_PoleOnTrajectory, RuntimeError, OverflowError, FloatingPointError) as exc:
            rows.append(OracleTrajectory(ic, None, None, passed=False,
                                         skipped=True, reason=str(exc) or type(exc).__name__))
            continue
        kappa, tau = curvature_torsion(xs, ys)
        dev = float(np.max(np.abs(kappa - np.mean(kappa))))
        mtau = float(np.max(np.abs(tau)))
        rows.append(OracleTrajectory(ic, dev, mtau,
                                     passed=(dev < tolerance and mtau < tolerance)))
    completed = [t for t in rows if not t.skipped]
    passed = bool(completed) and all(t.passed for t in completed)
    return OracleReport(passed, tolerance, tuple(rows),
                        n_completed=len(completed), n_skipped=len(rows) - len(completed))
