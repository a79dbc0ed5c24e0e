"""Symbolic expression trees over the jet variables x, y_i, p_i, q_i.

Expressions are immutable rational-function trees with exact rational
constants.  Every expression has a decidable canonical form (`normalize`),
an exact partial derivative (`partial`), a sound zero test (`is_zero`) and
exact evaluation at rational sample points (`eval_exact`).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .poly import Poly, RatFn, Ring

_KIND_ORDER = {"x": 0, "y": 1, "p": 2, "q": 3}


class ExprError(Exception):
    """Structural error in an expression."""


class ZeroDenominatorError(ExprError):
    """A quotient whose denominator is identically zero."""


class PoleError(ExprError):
    """Evaluation hit a vanishing denominator."""

    def __init__(self, subexpr: "Expr", message: str | None = None):
        self.subexpr = subexpr
        super().__init__(message or f"denominator vanishes at the point: {subexpr}")


@dataclass(frozen=True)
class VarId:
    """One jet variable: x, or y_i / p_i / q_i with 1-based index i."""

    kind: str
    index: int | None = None

    def __post_init__(self):
        if self.kind not in _KIND_ORDER:
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if self.kind == "x":
            if self.index is not None:
                raise ValueError("x carries no index")
        elif self.index is None or self.index < 1:
            raise ValueError(f"{self.kind} needs an index >= 1")

    def slot(self, m: int) -> int:
        if self.kind == "x":
            return 0
        if self.index > m:
            raise ValueError(f"variable {self} out of range for m={m}")
        base = {"y": 0, "p": m, "q": 2 * m}[self.kind]
        return base + self.index

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.index or 0)

    def __str__(self):
        return self.kind if self.kind == "x" else f"{self.kind}{self.index}"


X = VarId("x")


def y_(i: int) -> VarId:
    return VarId("y", i)


def p_(i: int) -> VarId:
    return VarId("p", i)


def q_(i: int) -> VarId:
    return VarId("q", i)


# --------------------------------------------------------------------------
# expression nodes
# --------------------------------------------------------------------------

class Expr:
    __slots__ = ("_ratcache", "_hash")

    def __init__(self):
        self._ratcache = None
        self._hash = None

    # operator sugar; accepts ints/Fractions on either side
    def __add__(self, other):
        return esum((self, as_expr(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return esum((self, eneg(as_expr(other))))

    def __rsub__(self, other):
        return esum((as_expr(other), eneg(self)))

    def __mul__(self, other):
        return eprod((self, as_expr(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return equot(self, as_expr(other))

    def __rtruediv__(self, other):
        return equot(as_expr(other), self)

    def __pow__(self, n: int):
        return epow(self, n)

    def __neg__(self):
        return eneg(self)

    def __str__(self):
        return serialize(self)

    def __repr__(self):
        return f"<Expr {serialize(self)}>"

    def __eq__(self, other):
        if self is other:
            return True
        return isinstance(other, Expr) and _struct_eq(self, other)

    def __hash__(self):
        if self._hash is None:
            self._hash = _struct_hash(self)
        return self._hash


class Constant(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        super().__init__()
        self.value = Fraction(value)


class Variable(Expr):
    __slots__ = ("var",)

    def __init__(self, var: VarId):
        super().__init__()
        self.var = var


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        super().__init__()
        self.terms = tuple(terms)


class Product(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        super().__init__()
        self.factors = tuple(factors)


class Power(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: int):
        super().__init__()
        if not isinstance(exponent, int):
            raise ExprError("Power exponent must be an integer")
        self.base = base
        self.exponent = exponent


class Quotient(Expr):
    __slots__ = ("num", "den")

    def __init__(self, num: Expr, den: Expr):
        super().__init__()
        if isinstance(den, Constant) and den.value == 0:
            raise ZeroDenominatorError("quotient by the zero expression")
        self.num = num
        self.den = den


def _struct_eq(a: Expr, b: Expr) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Constant):
        return a.value == b.value
    if isinstance(a, Variable):
        return a.var == b.var
    if isinstance(a, Sum):
        return len(a.terms) == len(b.terms) and all(map(_struct_eq, a.terms, b.terms))
    if isinstance(a, Product):
        return len(a.factors) == len(b.factors) and all(map(_struct_eq, a.factors, b.factors))
    if isinstance(a, Power):
        return a.exponent == b.exponent and _struct_eq(a.base, b.base)
    return _struct_eq(a.num, b.num) and _struct_eq(a.den, b.den)


def _struct_hash(e: Expr) -> int:
    if isinstance(e, Constant):
        return hash(("c", e.value))
    if isinstance(e, Variable):
        return hash(("v", e.var))
    if isinstance(e, Sum):
        return hash(("s", tuple(hash(t) for t in e.terms)))
    if isinstance(e, Product):
        return hash(("p", tuple(hash(t) for t in e.factors)))
    if isinstance(e, Power):
        return hash(("^", hash(e.base), e.exponent))
    return hash(("/", hash(e.num), hash(e.den)))


# --------------------------------------------------------------------------
# smart constructors
# --------------------------------------------------------------------------

def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction)):
        return Constant(v)
    if isinstance(v, VarId):
        return Variable(v)
    raise ExprError(f"cannot coerce {v!r} to an expression")


def const(v) -> Expr:
    return Constant(v)


def var(v: VarId) -> Expr:
    return Variable(v)


def esum(terms) -> Expr:
    flat = []
    acc = Fraction(0)
    for t in terms:
        t = as_expr(t)
        if isinstance(t, Constant):
            acc += t.value
        elif isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    if acc:
        flat.insert(0, Constant(acc))
    if not flat:
        return Constant(0)
    if len(flat) == 1:
        return flat[0]
    return Sum(flat)


def eprod(factors) -> Expr:
    flat = []
    acc = Fraction(1)
    for f in factors:
        f = as_expr(f)
        if isinstance(f, Constant):
            acc *= f.value
        elif isinstance(f, Product):
            for g in f.factors:
                if isinstance(g, Constant):
                    acc *= g.value
                else:
                    flat.append(g)
        else:
            flat.append(f)
    if acc == 0:
        return Constant(0)
    if acc != 1:
        flat.insert(0, Constant(acc))
    if not flat:
        return Constant(1)
    if len(flat) == 1:
        return flat[0]
    return Product(flat)


def eneg(e: Expr) -> Expr:
    return eprod((Constant(-1), e))


def epow(base, n: int) -> Expr:
    base = as_expr(base)
    if n == 1:
        return base
    if n == 0:
        return Constant(1)
    if isinstance(base, Constant):
        if base.value == 0 and n < 0:
            raise ZeroDenominatorError("0 raised to a negative power")
        return Constant(base.value ** n)
    return Power(base, n)


def equot(num, den) -> Expr:
    num, den = as_expr(num), as_expr(den)
    if isinstance(den, Constant):
        if den.value == 0:
            raise ZeroDenominatorError("quotient by zero")
        if den.value == 1:
            return num
        return eprod((Constant(1 / den.value), num))
    return Quotient(num, den)


# --------------------------------------------------------------------------
# traversal helpers
# --------------------------------------------------------------------------

def variables_of(e: Expr) -> set[VarId]:
    out: set[VarId] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Variable):
            out.add(n.var)
        elif isinstance(n, Sum):
            stack.extend(n.terms)
        elif isinstance(n, Product):
            stack.extend(n.factors)
        elif isinstance(n, Power):
            stack.append(n.base)
        elif isinstance(n, Quotient):
            stack.append(n.num)
            stack.append(n.den)
    return out


def max_index(e: Expr) -> int:
    return max((v.index or 0 for v in variables_of(e)), default=0)


def infer_m(*exprs: Expr) -> int:
    return max(1, max((max_index(e) for e in exprs), default=1))


def substitute(e: Expr, mapping: dict[VarId, Expr]) -> Expr:
    if isinstance(e, Variable):
        return mapping.get(e.var, e)
    if isinstance(e, Constant):
        return e
    if isinstance(e, Sum):
        return esum(substitute(t, mapping) for t in e.terms)
    if isinstance(e, Product):
        return eprod(substitute(f, mapping) for f in e.factors)
    if isinstance(e, Power):
        return epow(substitute(e.base, mapping), e.exponent)
    return equot(substitute(e.num, mapping), substitute(e.den, mapping))


# --------------------------------------------------------------------------
# conversion to the rational-function representation
# --------------------------------------------------------------------------

def to_ratfn(e: Expr, ring: Ring) -> RatFn:
    cache = e._ratcache
    if cache is not None:
        hit = cache.get(ring.m)
        if hit is not None:
            return hit
    r = _build_ratfn(e, ring)
    if e._ratcache is None:
        e._ratcache = {}
    e._ratcache[ring.m] = r
    return r


def _build_ratfn(e: Expr, ring: Ring) -> RatFn:
    if isinstance(e, Constant):
        return RatFn.const(ring, e.value)
    if isinstance(e, Variable):
        return RatFn.variable(ring, e.var.slot(ring.m))
    if isinstance(e, Sum):
        acc = RatFn.const(ring, 0)
        for t in e.terms:
            acc = acc + to_ratfn(t, ring)
        return acc
    if isinstance(e, Product):
        acc = RatFn.const(ring, 1)
        for f in e.factors:
            acc = acc * to_ratfn(f, ring)
        return acc
    if isinstance(e, Power):
        base = to_ratfn(e.base, ring)
        if e.exponent < 0 and base.is_zero:
            raise ZeroDenominatorError(f"negative power of the zero expression: {e}")
        return base ** e.exponent
    den = to_ratfn(e.den, ring)
    if den.is_zero:
        raise ZeroDenominatorError(f"denominator is identically zero: {e.den}")
    return to_ratfn(e.num, ring) * den.inverse()


def poly_to_expr(p: Poly) -> Expr:
    ring = p.ring
    m = ring.m
    terms = []
    for mo, c in p.sorted_terms():
        factors = [Constant(c)]
        for s in range(1, ring.nvars):
            e = ring.exp_of(mo, s)
            if not e:
                continue
            if s <= m:
                v = VarId("y", s)
            elif s <= 2 * m:
                v = VarId("p", s - m)
            else:
                v = VarId("q", s - 2 * m)
            factors.append(epow(Variable(v), e))
        ex = ring.exp_of(mo, 0)
        if ex:
            factors.append(epow(Variable(X), ex))
        terms.append(eprod(factors))
    return esum(terms)


def ratfn_to_expr(r: RatFn) -> Expr:
    num = poly_to_expr(r.num)
    if not r.den:
        out = num
    else:
        facs = sorted(r.den.items(), key=lambda fe: fe[0].sort_key())
        den = eprod(epow(poly_to_expr(f), e) for f, e in facs)
        out = Quotient(num, den) if not isinstance(den, Constant) else num
    out._ratcache = {r.ring.m: r}
    return out


# --------------------------------------------------------------------------
# canonical form
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RationalForm:
    """Canonical num/den pair: expanded, fully reduced, monic denominator.

    Terms are ((var, exp), ...) pairs with exact coefficients, in
    graded-lexicographic descending order, independent of the ring the form
    was computed in.
    """

    numerator: tuple
    denominator: tuple

    @property
    def is_zero(self) -> bool:
        return not self.numerator

    def _side_to_expr(self, side) -> Expr:
        terms = []
        for mono, c in side:
            factors = [Constant(c)]
            for (kind_rank, idx), e in mono:
                kind = "xypq"[kind_rank] if kind_rank else "x"
                v = X if kind == "x" else VarId(kind, idx)
                factors.append(epow(Variable(v), e))
            terms.append(eprod(factors))
        return esum(terms)

    def to_expr(self) -> Expr:
        num = self._side_to_expr(self.numerator)
        den = self._side_to_expr(self.denominator)
        if isinstance(den, Constant) and den.value == 1:
            return num
        return Quotient(num, den)

    def __str__(self):
        return f"({self._side_to_expr(self.numerator)}) / ({self._side_to_expr(self.denominator)})"


def normalize(e: Expr, m: int | None = None) -> RationalForm:
    """Canonical form; equal rational functions get bit-equal results."""
    if m is None:
        m = infer_m(e)
    ring = Ring(m)
    num, den = to_ratfn(e, ring).canonical()
    return RationalForm(num.sparse_terms(), den.sparse_terms())


def partial(e: Expr, v: VarId, m: int | None = None) -> Expr:
    """Exact partial derivative, all jet variables independent."""
    if m is None:
        m = max(infer_m(e), v.index or 1)
    ring = Ring(m)
    r = to_ratfn(e, ring).derivative(v.slot(m))
    return ratfn_to_expr(r)


# --------------------------------------------------------------------------
# sample points and evaluation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplePoint:
    """Exact rational values for all 3m+1 jet coordinates, slot-ordered."""

    m: int
    values: tuple

    @staticmethod
    def from_dict(m: int, assignment: dict) -> "SamplePoint":
        vals = [Fraction(0)] * (3 * m + 1)
        for v, val in assignment.items():
            if isinstance(v, str):
                v = parse_varid(v)
            vals[v.slot(m)] = Fraction(val)
        return SamplePoint(m, tuple(vals))

    def value_of(self, v: VarId) -> Fraction:
        return self.values[v.slot(self.m)]

    def as_dict(self) -> dict:
        out = {"x": self.values[0]}
        for i in range(1, self.m + 1):
            out[f"y{i}"] = self.values[i]
            out[f"p{i}"] = self.values[self.m + i]
            out[f"q{i}"] = self.values[2 * self.m + i]
        return out

    def floats(self) -> list[float]:
        return [float(v) for v in self.values]


def parse_varid(s: str) -> VarId:
    if s == "x":
        return X
    return VarId(s[0], int(s[1:]))


def random_sample_point(m: int, rng: random.Random,
                        num_bound: int = 1000, den_bound: int = 1000) -> SamplePoint:
    """Coordinates drawn from > 10^6 distinct rationals."""
    vals = tuple(Fraction(rng.randint(-num_bound, num_bound), rng.randint(1, den_bound))
                 for _ in range(3 * m + 1))
    return SamplePoint(m, vals)


def eval_exact(e: Expr, pt: SamplePoint) -> Fraction:
    """Exact value at pt; raises PoleError naming the offending subexpression."""
    if isinstance(e, Constant):
        return e.value
    if isinstance(e, Variable):
        return pt.value_of(e.var)
    if isinstance(e, Sum):
        return sum((eval_exact(t, pt) for t in e.terms), Fraction(0))
    if isinstance(e, Product):
        acc = Fraction(1)
        for f in e.factors:
            acc *= eval_exact(f, pt)
        return acc
    if isinstance(e, Power):
        b = eval_exact(e.base, pt)
        if b == 0 and e.exponent < 0:
            raise PoleError(e.base)
        return b ** e.exponent
    d = eval_exact(e.den, pt)
    if d == 0:
        raise PoleError(e.den)
    return eval_exact(e.num, pt) / d


def eval_float(e: Expr, vals: list[float], m: int) -> float:
    return to_ratfn(e, Ring(m)).eval_float(vals)


# --------------------------------------------------------------------------
# zero testing
# --------------------------------------------------------------------------

def is_zero_randomized(e: Expr, m: int | None = None, k: int = 7,
                       rng: random.Random | None = None):
    """k-point randomized zero test: 'False' is certain, 'True' is probable.

    Returns None when no valid sample point was found within the resample
    budget (caller should fall back to the canonical form).
    """
    if m is None:
        m = infer_m(e)
    if rng is None:
        rng = random.Random(0)
    checked = 0
    for _ in range(k):
        value = None
        for _attempt in range(20):
            pt = random_sample_point(m, rng)
            try:
                value = eval_exact(e, pt)
                break
            except PoleError:
                continue
        if value is None:
            continue
        checked += 1
        if value != 0:
            return False
    return True if checked else None


def is_zero(e: Expr, m: int | None = None, rng: random.Random | None = None) -> bool:
    """Decidable zero test: randomized short-circuit, canonical-form verdict."""
    if m is None:
        m = infer_m(e)
    quick = is_zero_randomized(e, m, k=7, rng=rng)
    if quick is False:
        return False
    return to_ratfn(e, Ring(m)).is_zero


def normalize_equal(a: Expr, b: Expr, m: int | None = None) -> bool:
    if m is None:
        m = max(infer_m(a), infer_m(b))
    return is_zero(a - b, m)


# --------------------------------------------------------------------------
# serialization (round-trips through the parser)
# --------------------------------------------------------------------------

def _frac_str(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def serialize(e: Expr) -> str:
    # precedence levels: sum=1, product=2, unary=3, power=4, atom=5
    def go(n: Expr, ctx: int) -> str:
        if isinstance(n, Constant):
            v = n.value
            s = _frac_str(abs(v))
            if v.denominator != 1 and ctx > 2:
                s = f"({s})"
            if v < 0:
                return f"(-{s})" if ctx > 2 else f"-{s}"
            return s
        if isinstance(n, Variable):
            return str(n.var)
        if isinstance(n, Sum):
            parts = [go(n.terms[0], 1)]
            for t in n.terms[1:]:
                s = go(t, 2)
                if s.startswith("-"):
                    parts.append(f" - {s[1:]}")
                else:
                    parts.append(f" + {s}")
            out = "".join(parts)
            return f"({out})" if ctx > 1 else out
        if isinstance(n, Product):
            out = "*".join(go(f, 3) for f in n.factors)
            return f"({out})" if ctx > 2 else out
        if isinstance(n, Power):
            b = go(n.base, 5)
            exp = str(n.exponent) if n.exponent >= 0 else f"({n.exponent})"
            return f"{b}^{exp}"
        out = f"{go(n.num, 3)}/{go(n.den, 5)}"
        return f"({out})" if ctx > 2 else out

    return go(e, 1)


# --------------------------------------------------------------------------
# random expressions (property tests, Schwartz-Zippel torture)
# --------------------------------------------------------------------------

def random_expr(rng: random.Random, m: int, depth: int = 3) -> Expr:
    """Small random expression tree over the m-system's variables."""
    if depth <= 0 or rng.random() < 0.3:
        r = rng.random()
        if r < 0.35:
            return Constant(Fraction(rng.randint(-6, 6), rng.randint(1, 4)))
        kind = rng.choice(["x", "y", "p", "q"])
        v = X if kind == "x" else VarId(kind, rng.randint(1, m))
        return Variable(v)
    op = rng.random()
    if op < 0.35:
        return esum(random_expr(rng, m, depth - 1) for _ in range(rng.randint(2, 3)))
    if op < 0.70:
        return eprod(random_expr(rng, m, depth - 1) for _ in range(rng.randint(2, 3)))
    if op < 0.85:
        base = random_expr(rng, m, depth - 1)
        n = rng.choice([2, 3, -1, -2])
        if n < 0 and to_ratfn(base, Ring(m)).is_zero:
            n = -n
        return epow(base, n)
    num = random_expr(rng, m, depth - 1)
    for _ in range(10):
        den = random_expr(rng, m, depth - 1)
        if not to_ratfn(den, Ring(m)).is_zero:
            return Quotient(num, den)
    return num


def random_disguised_zero(rng: random.Random, m: int) -> Expr:
    """An expression equal to zero but not structurally zero."""
    a = random_expr(rng, m, 2)
    b = random_expr(rng, m, 2)
    c = random_expr(rng, m, 2)
    pick = rng.randrange(4)
    if pick == 0:
        return eprod((a, b)) - eprod((b, a))
    if pick == 1:
        return epow(esum((a, b)), 2) - esum((eprod((a, a)), eprod((Constant(2), a, b)), eprod((b, b))))
    if pick == 2:
        return eprod((a, esum((b, c)))) - esum((eprod((a, b)), eprod((a, c))))
    return esum((eprod((a, a)), eneg(eprod((b, b))))) - eprod((a - b, a + b))
