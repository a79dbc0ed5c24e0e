"""Fundamental invariants of a third-order ODE system.

Computes the trace-free second Wilczynski invariant W2, the third Wilczynski
invariant W3, the q-Hessian invariant I2, the bilinear invariant I4 and the
auxiliary scalar/covector fields H^x, H^-1, together with the structural
I2 = 0 quadratic-form pattern match.

Everything is exact; entries of the returned tensor fields are expressions
already in compact rational-function form.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .expr import Expr, is_zero, normalize, ratfn_to_expr, to_ratfn
from .jet import OdeSystem, total_derivative_ratfn
from .poly import RatFn, Ring

_CALC_REGISTRY: dict = {}


def system_key(sys: OdeSystem):
    """Cache key: the normalized right-hand sides."""
    return (sys.m, tuple(normalize(e, sys.m) for e in sys.f))


def calc_for(sys: OdeSystem) -> "_Calc":
    key = system_key(sys)
    calc = _CALC_REGISTRY.get(key)
    if calc is None:
        calc = _Calc(sys)
        _CALC_REGISTRY[key] = calc  # concurrent duplicate insert: last write wins
    return calc


# --------------------------------------------------------------------------
# tensor fields (public carrier type)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TensorField:
    """Indexed array of expressions: scalar, vector(m), matrix(m x m) or
    tensor3(m x m x m).  Indices are 0-based."""

    m: int
    shape: str
    entries: tuple

    def entry(self, *idx) -> Expr:
        e = self.entries
        for i in idx:
            e = e[i]
        return e

    def iter_entries(self):
        if self.shape == "scalar":
            yield (), self.entries
            return
        if self.shape == "vector":
            for i, e in enumerate(self.entries):
                yield (i,), e
            return
        if self.shape == "matrix":
            for i, row in enumerate(self.entries):
                for j, e in enumerate(row):
                    yield (i, j), e
            return
        for i, plane in enumerate(self.entries):
            for j, row in enumerate(plane):
                for k, e in enumerate(row):
                    yield (i, j, k), e

    def is_zero_field(self) -> bool:
        return all(is_zero(e, self.m) for _, e in self.iter_entries())


def _wrap(m: int, grid) -> TensorField:
    """Build a TensorField from a RatFn scalar / nested lists."""
    if isinstance(grid, RatFn):
        return TensorField(m, "scalar", ratfn_to_expr(grid))
    if isinstance(grid[0], RatFn):
        return TensorField(m, "vector", tuple(ratfn_to_expr(r) for r in grid))
    if isinstance(grid[0][0], RatFn):
        return TensorField(m, "matrix",
                           tuple(tuple(ratfn_to_expr(r) for r in row) for row in grid))
    return TensorField(m, "tensor3",
                       tuple(tuple(tuple(ratfn_to_expr(r) for r in row) for row in plane)
                             for plane in grid))


def _unwrap(field: TensorField, ring: Ring):
    if field.shape == "scalar":
        return to_ratfn(field.entries, ring)
    if field.shape == "vector":
        return [to_ratfn(e, ring) for e in field.entries]
    if field.shape == "matrix":
        return [[to_ratfn(e, ring) for e in row] for row in field.entries]
    return [[[to_ratfn(e, ring) for e in row] for row in plane] for plane in field.entries]


# --------------------------------------------------------------------------
# internal exact pipeline
# --------------------------------------------------------------------------

class _Calc:
    """Per-system lazy computation cache at the rational-function level."""

    def __init__(self, sys: OdeSystem):
        self.sys = sys
        self.m = sys.m
        self.ring = Ring(sys.m)
        self.fr = sys.f_ratfns(self.ring)
        self.cache: dict = {}

    def memo(self, key, fn):
        hit = self.cache.get(key)
        if hit is None:
            hit = fn()
            self.cache[key] = hit
        return hit

    # -- scalars / linear algebra over RatFn --------------------------------
    def zero(self) -> RatFn:
        return RatFn.const(self.ring, 0)

    def D(self, r: RatFn) -> RatFn:
        return total_derivative_ratfn(self.ring, self.fr, r)

    def d_q(self, r: RatFn, k: int) -> RatFn:
        """Partial by q_k, 0-based k."""
        return r.derivative(self.ring.slot_q(k + 1))

    def d_p(self, r: RatFn, k: int) -> RatFn:
        return r.derivative(self.ring.slot_p(k + 1))

    def d_y(self, r: RatFn, k: int) -> RatFn:
        return r.derivative(self.ring.slot_y(k + 1))

    def mat_mul(self, A, B):
        m = self.m
        return [[sum((A[i][k] * B[k][j] for k in range(m)), self.zero())
                 for j in range(m)] for i in range(m)]

    def mat_tr(self, A) -> RatFn:
        return sum((A[i][i] for i in range(self.m)), self.zero())

    def mat_tr0(self, A):
        m = self.m
        t = self.mat_tr(A).scale(Fraction(1, m))
        return [[A[i][j] - t if i == j else A[i][j] for j in range(m)] for i in range(m)]

    def mat_map(self, fn, A):
        return [[fn(e) for e in row] for row in A]

    # -- first derivatives of f ---------------------------------------------
    @property
    def J(self):
        """J^i_j = df^i/dq^j."""
        return self.memo("J", lambda: [[self.d_q(self.fr[i], j) for j in range(self.m)]
                                       for i in range(self.m)])

    @property
    def P(self):
        return self.memo("P", lambda: [[self.d_p(self.fr[i], j) for j in range(self.m)]
                                       for i in range(self.m)])

    @property
    def Yd(self):
        return self.memo("Yd", lambda: [[self.d_y(self.fr[i], j) for j in range(self.m)]
                                        for i in range(self.m)])

    @property
    def DJ(self):
        return self.memo("DJ", lambda: self.mat_map(self.D, self.J))

    @property
    def DDJ(self):
        return self.memo("DDJ", lambda: self.mat_map(self.D, self.DJ))

    @property
    def DP(self):
        return self.memo("DP", lambda: self.mat_map(self.D, self.P))

    @property
    def J2(self):
        return self.memo("J2", lambda: self.mat_mul(self.J, self.J))

    @property
    def J3(self):
        return self.memo("J3", lambda: self.mat_mul(self.J2, self.J))

    @property
    def hess(self):
        """hess^i_jk = d2 f^i / dq^j dq^k."""
        def build():
            m = self.m
            out = []
            for i in range(m):
                plane = [[None] * m for _ in range(m)]
                for j in range(m):
                    dj = self.J[i][j]
                    for k in range(j, m):
                        v = self.d_q(dj, k)
                        plane[j][k] = v
                        plane[k][j] = v
                out.append(plane)
            return out
        return self.memo("hess", build)

    @property
    def Tj(self):
        """Tj_j = sum_i hess^i_ij (the common trace of the symmetric Hessian)."""
        return self.memo("Tj", lambda: [sum((self.hess[i][i][j] for i in range(self.m)),
                                            self.zero()) for j in range(self.m)])

    # -- invariants ----------------------------------------------------------
    @property
    def I2(self):
        def build():
            m = self.m
            c = Fraction(1, m + 1)
            out = []
            for i in range(m):
                plane = []
                for j in range(m):
                    row = []
                    for k in range(m):
                        v = self.hess[i][j][k]
                        if i == k:
                            v = v - self.Tj[j].scale(c)
                        if i == j:
                            v = v - self.Tj[k].scale(c)
                        row.append(v)
                    plane.append(row)
                out.append(plane)
            return out
        return self.memo("I2", build)

    @property
    def M2(self):
        """Pre-trace W2 matrix: df/dp - D(df/dq) + (1/3)(df/dq)^2."""
        def build():
            m = self.m
            return [[self.P[i][j] - self.DJ[i][j] + self.J2[i][j].scale(Fraction(1, 3))
                     for j in range(m)] for i in range(m)]
        return self.memo("M2", build)

    @property
    def W2(self):
        return self.memo("W2", lambda: self.mat_tr0(self.M2))

    @property
    def Hx(self):
        """H^x = -(1/4m) tr M2."""
        return self.memo("Hx", lambda: self.mat_tr(self.M2).scale(Fraction(-1, 4 * self.m)))

    @property
    def DHx(self):
        return self.memo("DHx", lambda: self.D(self.Hx))

    @property
    def Hm1(self):
        """H^-1_j = (1/(6(m+1))) sum_i d2 f^i / dq^i dq^j."""
        c = Fraction(1, 6 * (self.m + 1))
        return self.memo("Hm1", lambda: [t.scale(c) for t in self.Tj])

    @property
    def DHm1(self):
        return self.memo("DHm1", lambda: [self.D(h) for h in self.Hm1])

    def W3(self, cube: str = "matrix"):
        """Third Wilczynski invariant; `cube` picks the reading of (df/dq)^3."""
        def build():
            m = self.m
            JP = self.mat_mul(self.J, self.P)
            JDJ = self.mat_mul(self.J, self.DJ)
            DJJ = self.mat_mul(self.DJ, self.J)
            if cube == "matrix":
                cube_term = self.J3
            else:
                cube_term = [[self.J[i][j] ** 3 for j in range(m)] for i in range(m)]
            out = []
            for i in range(m):
                row = []
                for j in range(m):
                    v = (self.Yd[i][j]
                         + JP[i][j].scale(Fraction(1, 3))
                         - self.DP[i][j]
                         + self.DDJ[i][j].scale(Fraction(2, 3))
                         + cube_term[i][j].scale(Fraction(2, 27))
                         - JDJ[i][j].scale(Fraction(4, 9))
                         - DJJ[i][j].scale(Fraction(2, 9)))
                    if i == j:
                        v = v - self.DHx.scale(2)
                    row.append(v)
                out.append(row)
            return out
        return self.memo(("W3", cube), build)

    def Hm2(self, reading: str = "corrected"):
        """H^-2_j; `corrected` contracts H^-1_k with df^k/dq^j, `literal`
        subtracts the repeated-index scalar sum_k H^-1_k df^k/dq^k."""
        def build():
            m = self.m
            if reading == "corrected":
                tail = [sum((self.Hm1[k] * self.J[k][j] for k in range(m)), self.zero())
                        for j in range(m)]
            else:
                scal = sum((self.Hm1[k] * self.J[k][k] for k in range(m)), self.zero())
                tail = [scal] * m
            return [self.d_q(self.Hx, j) - self.DHm1[j] - tail[j] for j in range(m)]
        return self.memo(("Hm2", reading), build)

    def I4(self, variant: str = "connection", h2_reading: str = "corrected"):
        def build():
            m = self.m
            out = []
            if variant == "intro":
                contr = [sum((self.Hm1[l] * self.J[l][j] for l in range(m)), self.zero())
                         for j in range(m)]
                for j in range(m):
                    row = []
                    for k in range(m):
                        v = (-self.d_p(self.Hm1[k], j)
                             + self.d_q(self.d_q(self.Hx, j), k)
                             - self.d_q(self.DHm1[j], k)
                             - self.d_q(contr[j], k)
                             + (self.Hm1[j] * self.Hm1[k]).scale(2))
                        row.append(v)
                    out.append(row)
            else:
                hm2 = self.Hm2(h2_reading)
                for j in range(m):
                    row = []
                    for k in range(m):
                        v = (-self.d_p(self.Hm1[k], j)
                             + self.d_q(hm2[j], k)
                             + (self.Hm1[j] * self.Hm1[k]).scale(2))
                        row.append(v)
                    out.append(row)
            return out
        return self.memo(("I4", variant, h2_reading), build)

    def i4_variants_agree(self) -> bool:
        def build():
            a = self.I4("intro")
            b = self.I4("connection", "corrected")
            return all((a[j][k] - b[j][k]).is_zero
                       for j in range(self.m) for k in range(self.m))
        return self.memo("i4_agree", build)

    def mat_is_symmetric(self, A) -> bool:
        return all((A[j][k] - A[k][j]).is_zero
                   for j in range(self.m) for k in range(j + 1, self.m))


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------

def h_fields(sys: OdeSystem):
    """(H^x scalar field, H^-1 covector field)."""
    c = calc_for(sys)
    return _wrap(sys.m, c.Hx), _wrap(sys.m, c.Hm1)


def trace_free_matrix(M: TensorField) -> TensorField:
    """M - (tr M / m) Id."""
    if M.shape != "matrix":
        raise ValueError("trace_free_matrix needs a matrix field")
    ring = Ring(M.m)
    A = _unwrap(M, ring)
    m = M.m
    t = sum((A[i][i] for i in range(m)), RatFn.const(ring, 0)).scale(Fraction(1, m))
    out = [[A[i][j] - t if i == j else A[i][j] for j in range(m)] for i in range(m)]
    return _wrap(m, out)


def trace_free_sym3(T: TensorField) -> TensorField:
    """Trace-free part of a (1,2)-tensor symmetric in its lower indices:
    T^i_jk - (T_j d^i_k + T_k d^i_j)/(m+1) with T_j = sum_i T^i_ij."""
    if T.shape != "tensor3":
        raise ValueError("trace_free_sym3 needs a tensor3 field")
    ring = Ring(T.m)
    A = _unwrap(T, ring)
    m = T.m
    for i in range(m):
        for j in range(m):
            for k in range(j + 1, m):
                if not (A[i][j][k] - A[i][k][j]).is_zero:
                    raise ValueError(f"input not symmetric in lower indices at {(i, j, k)}")
    Tj = [sum((A[i][i][j] for i in range(m)), RatFn.const(ring, 0)) for j in range(m)]
    c = Fraction(1, m + 1)
    out = []
    for i in range(m):
        plane = []
        for j in range(m):
            row = []
            for k in range(m):
                v = A[i][j][k]
                if i == k:
                    v = v - Tj[j].scale(c)
                if i == j:
                    v = v - Tj[k].scale(c)
                row.append(v)
            plane.append(row)
        out.append(plane)
    return _wrap(m, out)


def invariant_I2(sys: OdeSystem) -> TensorField:
    return _wrap(sys.m, calc_for(sys).I2)


def invariant_W2(sys: OdeSystem) -> TensorField:
    return _wrap(sys.m, calc_for(sys).W2)


def invariant_W3(sys: OdeSystem, cube: str = "matrix") -> TensorField:
    if cube not in ("matrix", "entrywise"):
        raise ValueError("cube must be 'matrix' or 'entrywise'")
    return _wrap(sys.m, calc_for(sys).W3(cube))


def invariant_I4(sys: OdeSystem, variant: str = "connection",
                 h2_reading: str = "corrected") -> TensorField:
    if variant not in ("intro", "connection"):
        raise ValueError("variant must be 'intro' or 'connection'")
    return _wrap(sys.m, calc_for(sys).I4(variant, h2_reading))


def i4_variants_agree(sys: OdeSystem) -> bool:
    """Whether the two printed I4 formulas coincide for this system."""
    return calc_for(sys).i4_variants_agree()


# --------------------------------------------------------------------------
# I2 = 0 structural pattern
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticFormDecomposition:
    """f^i = 3 q_i (sum_j A_j q_j) + sum_j B^i_j q_j + C^i with shared A."""

    Acoef: tuple
    Bcoef: tuple
    Ccoef: tuple

    def reassemble(self, m: int) -> tuple:
        from .expr import q_, var
        out = []
        for i in range(m):
            quad = sum((self.Acoef[j] * var(q_(j + 1)) for j in range(m)), as_zero())
            lin = sum((self.Bcoef[i][j] * var(q_(j + 1)) for j in range(m)), as_zero())
            out.append(3 * var(q_(i + 1)) * quad + lin + self.Ccoef[i])
        return tuple(out)


def as_zero() -> Expr:
    from .expr import const
    return const(0)


def _q_free(r: RatFn, ring: Ring) -> bool:
    num, den = r.canonical()
    qslots = set(range(2 * ring.m + 1, 3 * ring.m + 1))
    return not (num.vars_present() & qslots) and not (den.vars_present() & qslots)


def match_I2_zero_form(sys: OdeSystem):
    """The decomposition certifying I2 = 0, or None when the system does not
    have the quadratic-in-q shared-A shape."""
    c = calc_for(sys)
    ring, m = c.ring, c.m
    # rational-in-q right-hand sides are structurally excluded
    for r in c.fr:
        num, den = r.canonical()
        qslots = set(range(2 * m + 1, 3 * m + 1))
        if den.vars_present() & qslots:
            return None
    # degree <= 2 in q <=> the q-Hessian is q-free
    for i in range(m):
        for j in range(m):
            for k in range(j, m):
                if not _q_free(c.hess[i][j][k], ring):
                    return None
    # shared A from the first equation's Hessian row
    A = [None] * m
    A[0] = c.hess[0][0][0].scale(Fraction(1, 6))
    for k in range(1, m):
        A[k] = c.hess[0][0][k].scale(Fraction(1, 3))
    for i in range(m):
        for j in range(m):
            for k in range(m):
                want = c.zero()
                if i == j:
                    want = want + A[k].scale(3)
                if i == k:
                    want = want + A[j].scale(3)
                if not (c.hess[i][j][k] - want).is_zero:
                    return None
    # linear and constant parts of the remainder
    qvars = [RatFn.variable(ring, ring.slot_q(i + 1)) for i in range(m)]
    Aq = sum((A[j] * qvars[j] for j in range(m)), c.zero())
    B = []
    C = []
    for i in range(m):
        rem = c.fr[i] - qvars[i] * Aq.scale(3)
        row = [rem.derivative(ring.slot_q(j + 1)) for j in range(m)]
        for b in row:
            if not _q_free(b, ring):
                return None
        ci = rem - sum((row[j] * qvars[j] for j in range(m)), c.zero())
        if not _q_free(ci, ring):
            return None
        B.append(row)
        C.append(ci)
    return QuadraticFormDecomposition(
        Acoef=tuple(ratfn_to_expr(a) for a in A),
        Bcoef=tuple(tuple(ratfn_to_expr(b) for b in row) for row in B),
        Ccoef=tuple(ratfn_to_expr(ci) for ci in C),
    )
