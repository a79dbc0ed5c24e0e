"""Exact multivariate polynomial and rational-function arithmetic.

Monomials are packed exponent vectors: one int per monomial, 16-bit field per
variable, total degree in the top field.  Integer comparison of packed
monomials is therefore exactly the graded-lexicographic order with
x < y1 < ... < ym < p1 < ... < pm < q1 < ... < qm, and monomial products are
integer additions.

Coefficients are `fractions.Fraction` throughout; nothing here ever rounds.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd as _int_gcd

EXP_BITS = 16
EXP_MASK = (1 << EXP_BITS) - 1
EXP_LIMIT = 1 << (EXP_BITS - 1)  # exponents must stay below the guard bit

ZERO = Fraction(0)
ONE = Fraction(1)


class Ring:
    """The jet-variable polynomial ring for an m-dimensional system.

    Variable slots: 0 = x, 1..m = y_i, m+1..2m = p_i, 2m+1..3m = q_i.
    """

    __slots__ = ("m", "nvars", "deg_shift", "guard_mask", "_shifts")

    def __init__(self, m: int):
        if m < 1:
            raise ValueError("ring needs m >= 1")
        self.m = m
        self.nvars = 3 * m + 1
        self.deg_shift = EXP_BITS * self.nvars
        self._shifts = tuple(EXP_BITS * s for s in range(self.nvars))
        guard = 0
        for s in range(self.nvars + 1):  # +1 covers the degree field
            guard |= 1 << (EXP_BITS * s + EXP_BITS - 1)
        self.guard_mask = guard

    # slot helpers (1-based variable indices)
    def slot_x(self) -> int:
        return 0

    def slot_y(self, i: int) -> int:
        return i

    def slot_p(self, i: int) -> int:
        return self.m + i

    def slot_q(self, i: int) -> int:
        return 2 * self.m + i

    def pack(self, exps) -> int:
        mono = 0
        deg = 0
        for s, e in enumerate(exps):
            if e:
                if e >= EXP_LIMIT:
                    raise OverflowError("exponent too large for packed monomial")
                mono |= e << self._shifts[s]
                deg += e
        if deg >= EXP_LIMIT:
            raise OverflowError("degree too large for packed monomial")
        return mono | (deg << self.deg_shift)

    def unpack(self, mono: int):
        return tuple((mono >> sh) & EXP_MASK for sh in self._shifts)

    def mono_deg(self, mono: int) -> int:
        return mono >> self.deg_shift

    def exp_of(self, mono: int, slot: int) -> int:
        return (mono >> self._shifts[slot]) & EXP_MASK

    def var_mono(self, slot: int, e: int = 1) -> int:
        return (e << self._shifts[slot]) | (e << self.deg_shift)

    def mono_div(self, a: int, b: int):
        """a / b as a packed monomial, or None if not divisible."""
        d = a - b
        if d < 0 or (d & self.guard_mask):
            return None
        return d


class Poly:
    """Immutable sparse multivariate polynomial over Q."""

    __slots__ = ("ring", "terms", "_hash")

    def __init__(self, ring: Ring, terms: dict):
        self.ring = ring
        self.terms = {mo: c for mo, c in terms.items() if c}
        self._hash = None

    # --- constructors -----------------------------------------------------
    @staticmethod
    def zero(ring: Ring) -> "Poly":
        return Poly(ring, {})

    @staticmethod
    def const(ring: Ring, c) -> "Poly":
        c = Fraction(c)
        return Poly(ring, {0: c} if c else {})

    @staticmethod
    def variable(ring: Ring, slot: int) -> "Poly":
        return Poly(ring, {ring.var_mono(slot): ONE})

    # --- predicates -------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_const(self) -> bool:
        return all(mo == 0 for mo in self.terms)

    def const_value(self):
        if self.is_zero:
            return ZERO
        if self.is_const:
            return self.terms[0]
        return None

    def degree(self) -> int:
        if not self.terms:
            return -1
        return self.ring.mono_deg(max(self.terms))

    def deg_in(self, slot: int) -> int:
        if not self.terms:
            return -1
        sh = self.ring._shifts[slot]
        return max((mo >> sh) & EXP_MASK for mo in self.terms)

    def vars_present(self):
        ring = self.ring
        out = set()
        for mo in self.terms:
            for s in range(ring.nvars):
                if (mo >> ring._shifts[s]) & EXP_MASK:
                    out.add(s)
        return out

    def lead(self):
        """(monomial, coefficient) of the graded-lex leading term."""
        if not self.terms:
            return None
        mo = max(self.terms)
        return mo, self.terms[mo]

    # --- arithmetic -------------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        res = dict(self.terms)
        for mo, c in other.terms.items():
            nv = res.get(mo, ZERO) + c
            if nv:
                res[mo] = nv
            else:
                res.pop(mo, None)
        return Poly(self.ring, res)

    def __sub__(self, other: "Poly") -> "Poly":
        res = dict(self.terms)
        for mo, c in other.terms.items():
            nv = res.get(mo, ZERO) - c
            if nv:
                res[mo] = nv
            else:
                res.pop(mo, None)
        return Poly(self.ring, res)

    def __neg__(self) -> "Poly":
        return Poly(self.ring, {mo: -c for mo, c in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        a, b = self.terms, other.terms
        if len(a) > len(b):
            a, b = b, a
        if not a:
            return Poly(self.ring, {})
        res: dict = {}
        get = res.get
        for mo1, c1 in a.items():
            for mo2, c2 in b.items():
                key = mo1 + mo2
                nv = get(key, ZERO) + c1 * c2
                if nv:
                    res[key] = nv
                else:
                    res.pop(key, None)
        return Poly(self.ring, res)

    def scale(self, c) -> "Poly":
        c = Fraction(c)
        if not c:
            return Poly(self.ring, {})
        return Poly(self.ring, {mo: cc * c for mo, cc in self.terms.items()})

    def mul_mono(self, mono: int, coeff=ONE) -> "Poly":
        if not coeff:
            return Poly(self.ring, {})
        return Poly(self.ring, {mo + mono: c * coeff for mo, c in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a Poly")
        result = Poly.const(self.ring, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def derivative(self, slot: int) -> "Poly":
        ring = self.ring
        sh = ring._shifts[slot]
        step = (1 << sh) | (1 << ring.deg_shift)
        res = {}
        for mo, c in self.terms.items():
            e = (mo >> sh) & EXP_MASK
            if e:
                res[mo - step] = c * e
        return Poly(ring, res)

    # --- evaluation -------------------------------------------------------
    def eval(self, vals):
        """Exact evaluation; vals is a sequence indexed by slot."""
        ring = self.ring
        total = ZERO
        for mo, c in self.terms.items():
            v = c
            for s in range(ring.nvars):
                e = (mo >> ring._shifts[s]) & EXP_MASK
                if e:
                    v *= vals[s] ** e
            total += v
        return total

    def eval_float(self, vals) -> float:
        ring = self.ring
        total = 0.0
        for mo, c in self.terms.items():
            v = float(c)
            for s in range(ring.nvars):
                e = (mo >> ring._shifts[s]) & EXP_MASK
                if e:
                    v *= vals[s] ** e
            total += v
        return total

    # --- division / gcd support -------------------------------------------
    def divexact(self, b: "Poly"):
        """self / b if the division is exact, else None."""
        if b.is_zero:
            raise ZeroDivisionError("division by zero polynomial")
        if self.is_zero:
            return self
        cb = b.const_value()
        if cb is not None:
            return self.scale(1 / cb)
        ring = self.ring
        bl_mo, bl_c = b.lead()
        rem = dict(self.terms)
        quo: dict = {}
        bterms = b.terms
        while rem:
            rmo = max(rem)
            d = ring.mono_div(rmo, bl_mo)
            if d is None:
                return None
            qc = rem[rmo] / bl_c
            quo[d] = qc
            for bm, bc in bterms.items():
                key = bm + d
                nv = rem.get(key, ZERO) - qc * bc
                if nv:
                    rem[key] = nv
                else:
                    rem.pop(key, None)
        return Poly(ring, quo)

    def content(self) -> Fraction:
        """Rational content, signed so that self/content has positive lead."""
        if self.is_zero:
            return ONE
        num_gcd = 0
        den_lcm = 1
        for c in self.terms.values():
            num_gcd = _int_gcd(num_gcd, abs(c.numerator))
            den_lcm = den_lcm * c.denominator // _int_gcd(den_lcm, c.denominator)
        cont = Fraction(num_gcd, den_lcm)
        if self.terms[max(self.terms)] < 0:
            cont = -cont
        return cont

    def primitive(self):
        """(content, primitive part); primitive part has positive lead."""
        if self.is_zero:
            return ONE, self
        cont = self.content()
        return cont, self.scale(1 / cont)

    def common_mono(self) -> int:
        """Largest monomial dividing every term (packed)."""
        if not self.terms:
            return 0
        ring = self.ring
        mins = None
        for mo in self.terms:
            exps = ring.unpack(mo)
            if mins is None:
                mins = list(exps)
            else:
                for s, e in enumerate(exps):
                    if e < mins[s]:
                        mins[s] = e
            if not any(mins):
                return 0
        return ring.pack(mins)

    def coeff_in(self, slot: int, k: int) -> "Poly":
        """Coefficient of (variable slot)^k, as a polynomial without that variable."""
        ring = self.ring
        sh = ring._shifts[slot]
        drop = (k << sh) | (k << ring.deg_shift)
        res = {}
        for mo, c in self.terms.items():
            if (mo >> sh) & EXP_MASK == k:
                res[mo - drop] = c
        return Poly(ring, res)

    # --- canonical output -------------------------------------------------
    def sorted_terms(self):
        """Terms in grlex-descending order."""
        return [(mo, self.terms[mo]) for mo in sorted(self.terms, reverse=True)]

    def sparse_terms(self):
        """Ring-independent canonical form: ((((kind, index), exp), ...), coeff)."""
        ring = self.ring
        m = ring.m
        out = []
        for mo, c in self.sorted_terms():
            pairs = []
            for s in range(ring.nvars - 1, -1, -1):
                e = (mo >> ring._shifts[s]) & EXP_MASK
                if not e:
                    continue
                if s == 0:
                    key = (0, 0)
                elif s <= m:
                    key = (1, s)
                elif s <= 2 * m:
                    key = (2, s - m)
                else:
                    key = (3, s - 2 * m)
                pairs.append((key, e))
            out.append((tuple(pairs), c))
        return tuple(out)

    def sort_key(self):
        return tuple(sorted(self.terms.items()))

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(self.terms.items())))
        return self._hash

    def __repr__(self):
        return f"Poly({dict(self.sorted_terms())!r})"


# --------------------------------------------------------------------------
# multivariate gcd: content/primitive-part recursion with a primitive PRS
# --------------------------------------------------------------------------

def _content_in(p: Poly, slot: int) -> Poly:
    """Gcd of the coefficients of p viewed as univariate in `slot`."""
    g = Poly.zero(p.ring)
    for k in range(p.deg_in(slot) + 1):
        c = p.coeff_in(slot, k)
        if c.is_zero:
            continue
        g = poly_gcd(g, c)
        if g.is_const:
            return Poly.const(p.ring, 1)
    return g


def _primitive_in(p: Poly, slot: int) -> Poly:
    cont = _content_in(p, slot)
    if cont.is_const:
        _, pp = p.primitive()
        return pp
    q = p.divexact(cont)
    _, pp = q.primitive()
    return pp


def _prem(f: Poly, g: Poly, slot: int) -> Poly:
    """Pseudo-remainder of f by g w.r.t. `slot` (up to content, fine for PRS)."""
    ring = f.ring
    dg = g.deg_in(slot)
    lcg = g.coeff_in(slot, dg)
    r = f
    while not r.is_zero:
        dr = r.deg_in(slot)
        if dr < dg:
            break
        lcr = r.coeff_in(slot, dr)
        shift = ring.var_mono(slot, dr - dg) if dr > dg else 0
        r = lcg * r - (lcr * g).mul_mono(shift)
    return r


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Primitive, positive-lead gcd of a and b."""
    if a.is_zero:
        return b.primitive()[1]
    if b.is_zero:
        return a.primitive()[1]
    ring = a.ring
    one = Poly.const(ring, 1)
    _, a = a.primitive()
    _, b = b.primitive()
    if a.is_const or b.is_const:
        return one
    # pull out common monomial factors first
    ma, mb = a.common_mono(), b.common_mono()
    gm = 0
    if ma or mb:
        ea, eb = ring.unpack(ma), ring.unpack(mb)
        gm = ring.pack(tuple(min(x, y) for x, y in zip(ea, eb)))
        if ma:
            a = Poly(ring, {mo - ma: c for mo, c in a.terms.items()})
        if mb:
            b = Poly(ring, {mo - mb: c for mo, c in b.terms.items()})
    gmono = Poly(ring, {gm: ONE})
    if a.is_const or b.is_const:
        return gmono
    if a == b:
        return a.mul_mono(gm)
    # whole-divisibility fast paths (powers of a shared factor, etc.)
    if a.degree() >= b.degree():
        if a.divexact(b) is not None:
            return b.mul_mono(gm)
    else:
        if b.divexact(a) is not None:
            return a.mul_mono(gm)
    shared = a.vars_present() & b.vars_present()
    if not shared:
        return gmono
    slot = min(shared, key=lambda s: (min(a.deg_in(s), b.deg_in(s)), s))
    ca = _content_in(a, slot)
    cb = _content_in(b, slot)
    cg = poly_gcd(ca, cb)
    if not ca.is_const:
        a = a.divexact(ca)
    if not cb.is_const:
        b = b.divexact(cb)
    if a.deg_in(slot) < b.deg_in(slot):
        a, b = b, a
    # primitive PRS
    while True:
        r = _prem(a, b, slot)
        if r.is_zero:
            res = _primitive_in(b, slot)
            break
        if r.deg_in(slot) <= 0:
            res = one
            break
        a, b = b, _primitive_in(r, slot)
    out = (cg * res).mul_mono(gm)
    _, out = out.primitive()
    return out


# --------------------------------------------------------------------------
# rational functions with factored denominators (working representation)
# --------------------------------------------------------------------------

class RatFn:
    """num / prod(f_i^e_i) with primitive positive-lead denominator factors.

    The factored denominator keeps cancellation cheap (exact trial division
    by known factors); `canonical()` runs the full gcd and is the only place
    the expensive general cancellation happens.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: dict):
        self.num = num
        self.den = den if not num.is_zero else {}

    @staticmethod
    def from_poly(p: Poly) -> "RatFn":
        return RatFn(p, {})

    @staticmethod
    def const(ring: Ring, c) -> "RatFn":
        return RatFn(Poly.const(ring, c), {})

    @staticmethod
    def variable(ring: Ring, slot: int) -> "RatFn":
        return RatFn(Poly.variable(ring, slot), {})

    @property
    def ring(self) -> Ring:
        return self.num.ring

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def _cancelled(self) -> "RatFn":
        if not self.den or self.num.is_zero:
            return RatFn(self.num, {})
        num = self.num
        den = {}
        for f, e in self.den.items():
            while e > 0:
                q = num.divexact(f)
                if q is None:
                    break
                num = q
                e -= 1
            if e:
                den[f] = e
        return RatFn(num, den)

    def _lifted_num(self, target: dict) -> Poly:
        """Numerator after bringing self to the denominator `target`."""
        num = self.num
        for f, e in target.items():
            d = e - self.den.get(f, 0)
            if d > 0:
                num = num * f ** d
        return num

    def __add__(self, other: "RatFn") -> "RatFn":
        if self.num.is_zero:
            return other
        if other.num.is_zero:
            return self
        if not self.den and not other.den:
            return RatFn(self.num + other.num, {})
        den = dict(self.den)
        for f, e in other.den.items():
            if den.get(f, 0) < e:
                den[f] = e
        num = self._lifted_num(den) + other._lifted_num(den)
        return RatFn(num, den)._cancelled()

    def __sub__(self, other: "RatFn") -> "RatFn":
        return self + (-other)

    def __neg__(self) -> "RatFn":
        return RatFn(-self.num, dict(self.den))

    def __mul__(self, other: "RatFn") -> "RatFn":
        num = self.num * other.num
        if not self.den and not other.den:
            return RatFn(num, {})
        den = dict(self.den)
        for f, e in other.den.items():
            den[f] = den.get(f, 0) + e
        return RatFn(num, den)._cancelled()

    def scale(self, c) -> "RatFn":
        return RatFn(self.num.scale(c), dict(self.den))

    def inverse(self) -> "RatFn":
        if self.num.is_zero:
            raise ZeroDivisionError("inverse of zero rational function")
        ring = self.ring
        num = Poly.const(ring, 1)
        for f, e in self.den.items():
            num = num * f ** e
        cont, prim = self.num.primitive()
        num = num.scale(1 / cont)
        if prim.is_const:
            return RatFn(num, {})
        return RatFn(num, {prim: 1})

    def __truediv__(self, other: "RatFn") -> "RatFn":
        return self * other.inverse()

    def __pow__(self, n: int) -> "RatFn":
        if n < 0:
            return self.inverse() ** (-n)
        num = self.num ** n
        den = {f: e * n for f, e in self.den.items()} if n else {}
        return RatFn(num, den)

    def derivative(self, slot: int) -> "RatFn":
        dnum = self.num.derivative(slot)
        if not self.den:
            return RatFn(dnum, {})
        facs = [(f, e) for f, e in self.den.items()]
        if all(f.deg_in(slot) <= 0 for f, _ in facs):
            return RatFn(dnum, dict(self.den))._cancelled()
        ring = self.ring
        P = Poly.const(ring, 1)
        for f, _ in facs:
            P = P * f
        total = dnum * P
        for i, (f, e) in enumerate(facs):
            df = f.derivative(slot)
            if df.is_zero:
                continue
            rest = Poly.const(ring, 1)
            for j, (g, _) in enumerate(facs):
                if j != i:
                    rest = rest * g
            total = total - self.num.scale(e) * df * rest
        den = {f: e + 1 for f, e in facs}
        return RatFn(total, den)._cancelled()

    def eval(self, vals):
        d = ONE
        for f, e in self.den.items():
            fv = f.eval(vals)
            if fv == 0:
                raise ZeroDivisionError("denominator vanishes at the point")
            d *= fv ** e
        return self.num.eval(vals) / d

    def eval_float(self, vals) -> float:
        d = 1.0
        for f, e in self.den.items():
            d *= f.eval_float(vals) ** e
        return self.num.eval_float(vals) / d

    def canonical(self):
        """(num, den) fully reduced, den monic; zero is (0, 1)."""
        ring = self.ring
        one = Poly.const(ring, 1)
        if self.num.is_zero:
            return Poly.zero(ring), one
        den = one
        for f, e in self.den.items():
            den = den * f ** e
        g = poly_gcd(self.num, den)
        if not g.is_const:
            num = self.num.divexact(g)
            den = den.divexact(g)
        else:
            num = self.num
        _, lc = den.lead()
        if lc != 1:
            num = num.scale(1 / lc)
            den = den.scale(1 / lc)
        return num, den

    def __repr__(self):
        return f"RatFn({self.num!r} / {self.den!r})"
