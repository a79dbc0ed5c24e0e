"""Coefficients of the characteristic Cartan connection in the fixed gauge.

Sixteen coefficient families A, B, C, E, F^-2, F^-3, G^x, G^-2, G^-3,
H^x, H^-1, H^-2, H^-3 of the gauge-fixed connection adapted to the system.
The H^-2 coefficient admits two index readings ("corrected" contracts
H^-1_k with df^k/dq^j, "literal" subtracts the repeated-index scalar);
both are computed, the corrected one is the default because it makes H^-2
a covector and reproduces the self-consistent I4.

A useful exact identity relating C to the second Wilczynski invariant
(asserted in the test suite):

    tr0(C) + W2 + (1/3) tr0(d/dx df/dq) - (1/9) tr0((df/dq)^2) == 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .invariants import TensorField, _Calc, _wrap, calc_for
from .jet import OdeSystem


@dataclass(frozen=True)
class ConnectionCoeffs:
    A: TensorField
    B: TensorField
    C: TensorField
    Gx: TensorField
    E: TensorField
    Fm2: TensorField
    Fm3: TensorField
    Hm1: TensorField
    Hm2: TensorField
    Hm3: TensorField
    Gm2: TensorField
    Gm3: TensorField
    Hx: TensorField
    h2_reading: str


def _conn_A(c: _Calc):
    third = Fraction(-1, 3)
    return c.memo("connA", lambda: c.mat_map(lambda r: r.scale(third), c.J))


def _conn_C(c: _Calc):
    def build():
        m = c.m
        out = []
        for i in range(m):
            row = []
            for j in range(m):
                v = (-c.P[i][j]
                     + c.DJ[i][j].scale(Fraction(2, 3))
                     - c.J2[i][j].scale(Fraction(2, 9)))
                if i == j:
                    v = v - c.Hx.scale(2)
                row.append(v)
            out.append(row)
        return out
    return c.memo("connC", build)


def _conn_E(c: _Calc):
    return c.memo("connE", lambda: [t.scale(Fraction(-1, 3 * (c.m + 1))) for t in c.Tj])


def _conn_Fm3(c: _Calc):
    def build():
        m = c.m
        out = []
        for j in range(m):
            v = (c.d_q(c.Hx, j)
                 - sum((c.Hm1[k] * c.J[k][j] for k in range(m)), c.zero())
                 - c.D(c.Tj[j]).scale(Fraction(1, 3 * (m + 1))))
            out.append(v)
        return out
    return c.memo("connFm3", build)


def _conn_Gm2(c: _Calc):
    def build():
        third = Fraction(-1, 3)
        return [[[c.hess[i][j][k].scale(third) for k in range(c.m)]
                 for j in range(c.m)] for i in range(c.m)]
    return c.memo("connGm2", build)


def _conn_Gm3(c: _Calc):
    def build():
        m = c.m
        Gx = _conn_A(c)  # G^x coincides with A
        Gm2 = _conn_Gm2(c)
        out = []
        for i in range(m):
            plane = []
            for j in range(m):
                row = []
                for k in range(m):
                    v = (c.d_p(c.J[i][j], k).scale(Fraction(-1, 3))
                         - c.D(Gm2[i][j][k])
                         - sum((Gx[i][l] * Gm2[l][j][k] for l in range(m)), c.zero())
                         + sum((Gm2[i][l][k] * Gx[l][j] for l in range(m)), c.zero()))
                    row.append(v)
                plane.append(row)
            out.append(plane)
        return out
    return c.memo("connGm3", build)


def _conn_Hm3(c: _Calc, h2_reading: str):
    def build():
        m = c.m
        hm2 = c.Hm2(h2_reading)
        return [(c.d_p(c.Hx, j)
                 - c.D(hm2[j])
                 - sum((c.Hm1[k] * c.J[k][j] for k in range(m)), c.zero())
                 - (c.Hx * c.Hm1[j]).scale(2)) for j in range(m)]
    return c.memo(("connHm3", h2_reading), build)


def connection_coefficients(sys: OdeSystem, h2_reading: str = "corrected") -> ConnectionCoeffs:
    """All coefficient families of the gauge-fixed characteristic connection."""
    if h2_reading not in ("corrected", "literal"):
        raise ValueError("h2_reading must be 'corrected' or 'literal'")
    c = calc_for(sys)
    m = c.m
    A = _conn_A(c)
    B = c.mat_map(lambda r: r.scale(2), A)
    return ConnectionCoeffs(
        A=_wrap(m, A),
        B=_wrap(m, B),
        C=_wrap(m, _conn_C(c)),
        Gx=_wrap(m, A),
        E=_wrap(m, _conn_E(c)),
        Fm2=_wrap(m, list(c.Hm1)),
        Fm3=_wrap(m, _conn_Fm3(c)),
        Hm1=_wrap(m, list(c.Hm1)),
        Hm2=_wrap(m, c.Hm2(h2_reading)),
        Hm3=_wrap(m, _conn_Hm3(c, h2_reading)),
        Gm2=_wrap(m, _conn_Gm2(c)),
        Gm3=_wrap(m, _conn_Gm3(c)),
        Hx=_wrap(m, c.Hx),
        h2_reading=h2_reading,
    )
