"""The explicit conformal-geodesic conditions and the final verdict.

Seven exact tensor conditions plus the I4 maximal-rank requirement decide
whether a third-order system is (locally) the equation of conformal
geodesics of some conformal structure.  All residuals are computed exactly;
a failing condition comes with a human-checkable witness: a nonzero entry
and a rational sample point where it evaluates to a nonzero value.

Condition 2 is implemented with the coadjoint contraction
-(1/3)(J^T I4 + I4 J) - dI4/dx, J = df/dq: the plain-product orientation of
its first term does not annihilate the circle corpus while this one does
(documented erratum; the report's variant ledger records it).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .expr import (Expr, PoleError, eval_exact, is_zero_randomized,
                   random_sample_point, ratfn_to_expr, SamplePoint)
from .invariants import TensorField, _Calc, _wrap, calc_for
from .jet import OdeSystem
from .poly import RatFn

CONDITION_IDS = ("1", "2", "3", "4", "5", "6", "7")


@dataclass(frozen=True)
class CheckConfig:
    i4_variant: str = "connection"
    h2_reading: str = "corrected"
    d2w3_variant: str = "a"  # 'a': 2(H^-2_k - H^-1_l B^l_k) W2; 'b': 2(H^-1_k - H^-2_l B^l_k) W2
    w3_cube: str = "matrix"
    zero_mode: str = "exact"  # 'randomized' skips canonical forms
    seed: int = 0


@dataclass(frozen=True)
class Witness:
    """1-based entry index, a sample point, and the exact nonzero value there."""

    entry: tuple
    point: SamplePoint
    value: Fraction


@dataclass(frozen=True)
class ConditionResidual:
    id: str
    residual: TensorField
    passed: bool
    witness: Witness | None = None


@dataclass(frozen=True)
class Verdict:
    conformal: bool
    conditions: tuple
    variant_ledger: dict
    mode: str
    summary: str

    def condition(self, cid: str) -> ConditionResidual:
        for c in self.conditions:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @property
    def failing(self) -> list:
        return [c.id for c in self.conditions if not c.passed]


# --------------------------------------------------------------------------
# covariant derivatives of the Wilczynski invariants
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CovariantDerivs:
    """Index layout [i][j][k]: component (i, j) differentiated along
    direction k (the e^k_{-1} or e^k_{-2} frame direction)."""

    D1W2: TensorField
    D1W3: TensorField
    D2W2: TensorField
    D2W3_variantA: TensorField
    D2W3_variantB: TensorField


def _d1w2(c: _Calc):
    return c.memo("d1w2", lambda: [[[c.d_q(c.W2[i][j], k) for k in range(c.m)]
                                    for j in range(c.m)] for i in range(c.m)])


def _d1w3(c: _Calc, cube: str):
    def build():
        m = c.m
        W3 = c.W3(cube)
        return [[[c.d_q(W3[i][j], k) + (c.Hm1[k] * c.W2[i][j]).scale(2)
                  for k in range(m)] for j in range(m)] for i in range(m)]
    return c.memo(("d1w3", cube), build)


def _d2w2(c: _Calc):
    def build():
        m = c.m
        return [[[c.d_p(c.W2[i][j], k) - (c.Hm1[k] * c.W2[i][j]).scale(4)
                  for k in range(m)] for j in range(m)] for i in range(m)]
    return c.memo("d2w2", build)


def _B(c: _Calc):
    return c.memo("Bcoef", lambda: c.mat_map(lambda r: r.scale(Fraction(-2, 3)), c.J))


def _gm2_dir(c: _Calc, k: int):
    """(G_k)^i_j = G^{i,-2}_{jk} = -(1/3) hess^i_jk."""
    third = Fraction(-1, 3)
    return [[c.hess[i][j][k].scale(third) for j in range(c.m)] for i in range(c.m)]


def _d2w3_dir(c: _Calc, k: int, variant: str, h2_reading: str, cube: str):
    """D_{e^k_{-2}} W3 as an m x m matrix."""
    m = c.m
    W3 = c.W3(cube)
    B = _B(c)
    hm2 = c.Hm2(h2_reading)
    if variant == "a":
        co = (hm2[k] - sum((c.Hm1[l] * B[l][k] for l in range(m)), c.zero())).scale(2)
    else:
        co = (c.Hm1[k] - sum((hm2[l] * B[l][k] for l in range(m)), c.zero())).scale(2)
    Gk = _gm2_dir(c, k)
    out = []
    for i in range(m):
        row = []
        for j in range(m):
            v = (c.d_p(W3[i][j], k)
                 - sum((c.d_q(W3[i][j], l) * B[l][k] for l in range(m)), c.zero())
                 - (c.Hm1[k] * W3[i][j]).scale(6)
                 + co * c.W2[i][j]
                 + sum((Gk[i][l] * W3[l][j] - W3[i][l] * Gk[l][j] for l in range(m)),
                       c.zero()))
            row.append(v)
        out.append(row)
    return out


def _d2w3(c: _Calc, variant: str, h2_reading: str, cube: str):
    def build():
        m = c.m
        per_dir = [_d2w3_dir(c, k, variant, h2_reading, cube) for k in range(m)]
        return [[[per_dir[k][i][j] for k in range(m)] for j in range(m)] for i in range(m)]
    return c.memo(("d2w3", variant, h2_reading, cube), build)


def covariant_derivatives(sys: OdeSystem, h2_reading: str = "corrected",
                          cube: str = "matrix") -> CovariantDerivs:
    c = calc_for(sys)
    m = c.m
    return CovariantDerivs(
        D1W2=_wrap(m, _d1w2(c)),
        D1W3=_wrap(m, _d1w3(c, cube)),
        D2W2=_wrap(m, _d2w2(c)),
        D2W3_variantA=_wrap(m, _d2w3(c, "a", h2_reading, cube)),
        D2W3_variantB=_wrap(m, _d2w3(c, "b", h2_reading, cube)),
    )


# --------------------------------------------------------------------------
# the seven conditions (rational-function level)
# --------------------------------------------------------------------------

def _i4_grid(c: _Calc, cfg: CheckConfig):
    return c.I4(cfg.i4_variant, cfg.h2_reading)


def _cond2_grid(c: _Calc, I4):
    """-(1/3)(J^T I4 + I4 J) - D(I4)."""
    m = c.m
    third = Fraction(-1, 3)
    out = []
    for i in range(m):
        row = []
        for j in range(m):
            v = (sum((c.J[k][i] * I4[k][j] for k in range(m)), c.zero()).scale(third)
                 + sum((I4[i][k] * c.J[k][j] for k in range(m)), c.zero()).scale(third)
                 - c.D(I4[i][j]))
            row.append(v)
        out.append(row)
    return out


def _cond2_covariant_grid(c: _Calc, I4):
    """Same condition assembled from the connection coefficient G^x."""
    from .connection import _conn_A
    m = c.m
    Gx = _conn_A(c)
    out = []
    for i in range(m):
        row = []
        for j in range(m):
            v = (sum((Gx[k][i] * I4[k][j] for k in range(m)), c.zero())
                 + sum((I4[i][k] * Gx[k][j] for k in range(m)), c.zero())
                 - c.D(I4[i][j]))
            row.append(v)
        out.append(row)
    return out


def _cond3_grid(c: _Calc, I4):
    m = c.m
    return [[[c.d_q(I4[j][k], l) for l in range(m)] for k in range(m)] for j in range(m)]


def _cond5_grid(c: _Calc, cube: str):
    m = c.m
    W3 = c.W3(cube)
    X = [[[ (c.d_p(c.W2[i][k], j)
             - c.d_q(W3[i][k], j).scale(2)
             + c.d_q(W3[i][j], k)
             - (c.Hm1[j] * c.W2[i][k]).scale(8)
             + (c.Hm1[k] * c.W2[i][j]).scale(2))
            for k in range(m)] for j in range(m)] for i in range(m)]
    # trace-free part in (i, j), per k
    out = []
    for i in range(m):
        plane = []
        for j in range(m):
            row = []
            for k in range(m):
                v = X[i][j][k]
                if i == j:
                    tr = sum((X[a][a][k] for a in range(m)), c.zero())
                    v = v - tr.scale(Fraction(1, m))
                row.append(v)
            plane.append(row)
        out.append(plane)
    return out


def _cond6_inner(c: _Calc, cube: str):
    m = c.m
    W3 = c.W3(cube)
    trW3 = sum((W3[i][i] for i in range(m)), c.zero())
    return [ (sum((c.d_q(W3[i][k], i) for i in range(m)), c.zero()).scale(-2)
              + c.d_q(trW3, k)) for k in range(m)]


def _cond6_grid(c: _Calc, cube: str):
    m = c.m
    inner = _cond6_inner(c, cube)
    return [[c.d_q(inner[k], l) for l in range(m)] for k in range(m)]


def _cond7_S(c: _Calc, cube: str):
    m = c.m
    W3 = c.W3(cube)
    trW3 = sum((W3[i][i] for i in range(m)), c.zero())
    return [ (sum((c.d_p(c.W2[i][j], i) for i in range(m)), c.zero())
              - sum((c.d_q(W3[i][j], i) for i in range(m)), c.zero()).scale(2)
              + c.d_q(trW3, j)
              - sum((c.Hm1[i] * c.W2[i][j] for i in range(m)), c.zero()).scale(8))
            for j in range(m)]


def _cond7_grid(c: _Calc, cfg: CheckConfig, variant: str | None = None):
    m = c.m
    variant = variant or cfg.d2w3_variant
    d2w3 = _d2w3(c, variant, cfg.h2_reading, cfg.w3_cube)
    I4 = _i4_grid(c, cfg)
    S = _cond7_S(c, cfg.w3_cube)
    V = [ (sum((d2w3[i][j][i] for i in range(m)), c.zero())
           - sum((d2w3[i][i][j] for i in range(m)), c.zero())) for j in range(m)]
    out = []
    for j in range(m):
        row = []
        for l in range(m):
            v = (-(c.Hm1[l] * S[j])
                 + c.d_q(V[j], l)
                 + sum((I4[j][i] * c.W2[i][l] for i in range(m)), c.zero()))
            row.append(v)
        out.append(row)
    return out


def _condition_grids(c: _Calc, cfg: CheckConfig) -> dict:
    I4 = _i4_grid(c, cfg)
    return {
        "1": c.I2,
        "2": _cond2_grid(c, I4),
        "3": _cond3_grid(c, I4),
        "4": _d1w2(c),
        "5": _cond5_grid(c, cfg.w3_cube),
        "6": _cond6_grid(c, cfg.w3_cube),
        "7": _cond7_grid(c, cfg),
    }


# --------------------------------------------------------------------------
# zero decisions and witnesses
# --------------------------------------------------------------------------

def _iter_grid(grid):
    if isinstance(grid, RatFn):
        yield (), grid
        return
    for i, sub in enumerate(grid):
        for idx, r in _iter_grid(sub):
            yield (i,) + idx, r


def _entry_is_zero(r: RatFn, expr: Expr, m: int, cfg: CheckConfig,
                   rng: random.Random) -> bool:
    if cfg.zero_mode == "exact":
        return r.is_zero
    quick = is_zero_randomized(expr, m, k=7, rng=rng)
    return bool(quick)


def _find_witness(grid, field_: TensorField, m: int, rng: random.Random,
                  cfg: CheckConfig) -> Witness | None:
    for idx, r in _iter_grid(grid):
        expr = field_.entry(*idx) if idx else field_.entries
        nonzero = (not r.is_zero) if cfg.zero_mode == "exact" else \
            (is_zero_randomized(expr, m, k=7, rng=rng) is False)
        if not nonzero:
            continue
        for _ in range(100):
            pt = random_sample_point(m, rng)
            try:
                v = eval_exact(expr, pt)
            except PoleError:
                continue
            if v != 0:
                return Witness(tuple(i + 1 for i in idx), pt, v)
    return None


def condition_residuals(sys: OdeSystem, cfg: CheckConfig | None = None) -> list:
    """The seven condition residuals, in order, with pass/fail and witnesses."""
    cfg = cfg or CheckConfig()
    c = calc_for(sys)
    rng = random.Random(cfg.seed)
    out = []
    for cid, grid in _condition_grids(c, cfg).items():
        field_ = _wrap(c.m, grid)
        passed = all(_entry_is_zero(r, field_.entry(*idx) if idx else field_.entries,
                                    c.m, cfg, rng)
                     for idx, r in _iter_grid(grid))
        witness = None if passed else _find_witness(grid, field_, c.m, rng, cfg)
        out.append(ConditionResidual(cid, field_, passed, witness))
    return out


def _det(c: _Calc, A) -> RatFn:
    n = len(A)
    if n == 1:
        return A[0][0]
    total = c.zero()
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        term = A[0][j] * _det(c, minor)
        total = total + term if j % 2 == 0 else total - term
    return total


def i4_det(sys: OdeSystem, cfg: CheckConfig | None = None) -> Expr:
    cfg = cfg or CheckConfig()
    c = calc_for(sys)
    return ratfn_to_expr(_det(c, _i4_grid(c, cfg)))


def i4_rank_assessment(sys: OdeSystem, cfg: CheckConfig | None = None) -> ConditionResidual:
    """Maximal rank of I4, decided by det(I4) not being identically zero.

    Identical vanishing is decidable; 'everywhere' nondegeneracy is
    domain-dependent, so a pass certifies 'generically non-degenerate' and
    the witness is a rational point with nonzero determinant.
    """
    cfg = cfg or CheckConfig()
    c = calc_for(sys)
    rng = random.Random(cfg.seed + 1)
    det = _det(c, _i4_grid(c, cfg))
    field_ = _wrap(c.m, det)
    if cfg.zero_mode == "exact":
        passed = not det.is_zero
    else:
        passed = is_zero_randomized(field_.entries, c.m, k=7, rng=rng) is False
    witness = None
    if passed:
        for _ in range(100):
            pt = random_sample_point(c.m, rng)
            try:
                v = eval_exact(field_.entries, pt)
            except PoleError:
                continue
            if v != 0:
                witness = Witness((), pt, v)
                break
    return ConditionResidual("rank", field_, passed, witness)


# --------------------------------------------------------------------------
# formulation cross-checks and the verdict
# --------------------------------------------------------------------------

def _grids_equal(a, b) -> bool:
    return all((ra - rb).is_zero for (_, ra), (_, rb) in zip(_iter_grid(a), _iter_grid(b)))


def _grid_zero(grid) -> bool:
    return all(r.is_zero for _, r in _iter_grid(grid))


def _prop4_cond5_grid(c: _Calc, cube: str):
    """tr0( D_{-1,k} W3^i_j - 2 D_{-1,j} W3^i_k + D_{-2,j} W2^i_k )."""
    m = c.m
    d1w3 = _d1w3(c, cube)
    d2w2 = _d2w2(c)
    X = [[[d1w3[i][j][k] - d1w3[i][k][j].scale(2) + d2w2[i][k][j]
           for k in range(m)] for j in range(m)] for i in range(m)]
    out = []
    for i in range(m):
        plane = []
        for j in range(m):
            row = []
            for k in range(m):
                v = X[i][j][k]
                if i == j:
                    tr = sum((X[a][a][k] for a in range(m)), c.zero())
                    v = v - tr.scale(Fraction(1, m))
                row.append(v)
            plane.append(row)
        out.append(plane)
    return out


def _prop4_cond6_grid(c: _Calc, cube: str):
    """d/dq^l of the covariant inner bracket (keeps the W2-carrying terms)."""
    m = c.m
    d1w3 = _d1w3(c, cube)
    d2w2 = _d2w2(c)
    inner = [ (sum((d1w3[i][i][k] for i in range(m)), c.zero())
               - sum((d1w3[i][k][i] for i in range(m)), c.zero()).scale(2)
               + sum((d2w2[i][k][i] for i in range(m)), c.zero())) for k in range(m)]
    return [[c.d_q(inner[k], l) for l in range(m)] for k in range(m)]


def _prop4_cond7_grid(c: _Calc, cfg: CheckConfig):
    """d/dq^l (V_j) + (I4 W2)_jl without the final theorem's H^-1 S correction."""
    m = c.m
    d2w3 = _d2w3(c, cfg.d2w3_variant, cfg.h2_reading, cfg.w3_cube)
    I4 = _i4_grid(c, cfg)
    V = [ (sum((d2w3[i][j][i] for i in range(m)), c.zero())
           - sum((d2w3[i][i][j] for i in range(m)), c.zero())) for j in range(m)]
    return [[c.d_q(V[j], l) + sum((I4[j][i] * c.W2[i][l] for i in range(m)), c.zero())
             for l in range(m)] for j in range(m)]


def commutator_bootstrap(sys: OdeSystem, cfg: CheckConfig | None = None):
    """(D_{-2} I4, D_{-3} I4) assembled through the commutator argument
    D_{-2} = [D_x, D_{-1}]; both vanish identically on systems whose
    conditions 2 and 3 hold identically.  Layout [a][b][k], k = direction."""
    cfg = cfg or CheckConfig()
    c = calc_for(sys)
    m = c.m
    I4 = _i4_grid(c, cfg)
    dI4q = [[[c.d_q(I4[a][b], l) for b in range(m)] for a in range(m)] for l in range(m)]
    dm2 = []
    for k in range(m):
        Gk = _gm2_dir(c, k)
        M = [[ (c.d_p(I4[a][b], k)
                + sum((c.J[l][k] * dI4q[l][a][b] for l in range(m)), c.zero())
                - sum((Gk[cc][a] * I4[cc][b] for cc in range(m)), c.zero())
                - sum((I4[a][cc] * Gk[cc][b] for cc in range(m)), c.zero()))
               for b in range(m)] for a in range(m)]
        dm2.append(M)
    Rx = _cond2_grid(c, I4)
    B = _B(c)
    third = Fraction(-1, 3)
    dm3 = []
    for k in range(m):
        M = dm2[k]
        out = []
        for a in range(m):
            row = []
            for b in range(m):
                v = (sum((c.J[cc][a] * M[cc][b] for cc in range(m)), c.zero()).scale(third)
                     + sum((M[a][cc] * c.J[cc][b] for cc in range(m)), c.zero()).scale(third)
                     - c.D(M[a][b])
                     - c.d_p(Rx[a][b], k)
                     + sum((B[l][k] * c.d_q(Rx[a][b], l) for l in range(m)), c.zero()))
                row.append(v)
            out.append(row)
        dm3.append(out)
    to3 = lambda per_dir: [[[per_dir[k][a][b] for k in range(m)]
                            for b in range(m)] for a in range(m)]
    return _wrap(m, to3(dm2)), _wrap(m, to3(dm3))


def _build_ledger(c: _Calc, cfg: CheckConfig, grids: dict) -> dict:
    I4 = _i4_grid(c, cfg)
    I4lit = c.I4("connection", "literal")
    alt_variant = "b" if cfg.d2w3_variant == "a" else "a"
    cond7_alt = _cond7_grid(c, cfg, variant=alt_variant)
    d2w3_a = _d2w3(c, "a", cfg.h2_reading, cfg.w3_cube)
    d2w3_b = _d2w3(c, "b", cfg.h2_reading, cfg.w3_cube)
    return {
        "i4_variant": cfg.i4_variant,
        "h2_reading": cfg.h2_reading,
        "d2w3_variant": cfg.d2w3_variant,
        "w3_cube": cfg.w3_cube,
        "i4_intro_equals_connection": c.i4_variants_agree(),
        "i4_symmetric": c.mat_is_symmetric(I4),
        "i4_connection_literal_symmetric": c.mat_is_symmetric(I4lit),
        "h2_literal_equals_corrected": _grids_equal(c.Hm2("corrected"), c.Hm2("literal")),
        "condition2_orientation":
            "coadjoint: first term contracts the upper index of df/dq with I4",
        "condition2_covariant_form_agrees":
            _grids_equal(grids["2"], _cond2_covariant_grid(c, I4)),
        "condition3_covariant_form_agrees":
            _grids_equal(grids["3"], _cond3_grid(c, I4)),
        "d2w3_variants_agree": _grids_equal(d2w3_a, d2w3_b),
        "condition7_alternate_variant_passes": _grid_zero(cond7_alt) or
            _grids_equal(grids["7"], cond7_alt),
        "prop4_condition5_agrees":
            _grids_equal(grids["5"], _prop4_cond5_grid(c, cfg.w3_cube)),
        "prop4_condition6_agrees":
            _grids_equal(grids["6"], _prop4_cond6_grid(c, cfg.w3_cube)),
        "prop4_condition7_agrees":
            _grids_equal(grids["7"], _prop4_cond7_grid(c, cfg)),
        "i2_trace_normalization": "1/(m+1) with m the system dimension",
    }


def check_conformal(sys: OdeSystem, cfg: CheckConfig | None = None,
                    with_ledger: bool = True) -> Verdict:
    """Full verdict: seven conditions, rank, and the variant ledger.

    All conditions are evaluated even after a failure (no short-circuiting);
    the verdict only claims local equivalence.
    """
    cfg = cfg or CheckConfig()
    c = calc_for(sys)
    rng = random.Random(cfg.seed)
    grids = _condition_grids(c, cfg)
    residuals = []
    for cid in CONDITION_IDS:
        grid = grids[cid]
        field_ = _wrap(c.m, grid)
        passed = all(_entry_is_zero(r, field_.entry(*idx) if idx else field_.entries,
                                    c.m, cfg, rng)
                     for idx, r in _iter_grid(grid))
        witness = None if passed else _find_witness(grid, field_, c.m, rng, cfg)
        residuals.append(ConditionResidual(cid, field_, passed, witness))
    rank = i4_rank_assessment(sys, cfg)
    residuals.append(rank)
    conformal = all(r.passed for r in residuals)
    ledger = _build_ledger(c, cfg, grids) if with_ledger else {}
    mode = "exact" if cfg.zero_mode == "exact" else "probable"
    if conformal:
        summary = ("the system is locally the equation of conformal geodesics "
                   "of some conformal structure"
                   + (" (probable: randomized zero tests only)" if mode == "probable" else "")
                   + "; I4 is generically non-degenerate")
    else:
        fails = ", ".join(r.id for r in residuals if not r.passed)
        summary = f"not a conformal-geodesic system (failing: {fails})"
    return Verdict(conformal, tuple(residuals), ledger, mode, summary)
