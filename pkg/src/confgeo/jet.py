"""Third-order ODE systems on their jet surface: total derivative and
affine point-transformation utilities."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .expr import (Expr, VarId, X, as_expr, infer_m, max_index, p_, q_,
                   ratfn_to_expr, substitute, to_ratfn, y_)
from .poly import RatFn, Ring


@dataclass(frozen=True)
class OdeSystem:
    """y_i''' = f_i(x, y, y', y'') for i = 1..m, m >= 2."""

    m: int
    f: tuple

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("system dimension must be m >= 2")
        object.__setattr__(self, "f", tuple(as_expr(e) for e in self.f))
        if len(self.f) != self.m:
            raise ValueError(f"expected {self.m} right-hand sides, got {len(self.f)}")
        bad = max((max_index(e) for e in self.f), default=0)
        if bad > self.m:
            raise ValueError(f"right-hand side uses index {bad} > m={self.m}")

    @property
    def ring(self) -> Ring:
        return Ring(self.m)

    def f_ratfns(self, ring: Ring | None = None) -> list[RatFn]:
        ring = ring or self.ring
        return [to_ratfn(e, ring) for e in self.f]


def total_derivative_ratfn(ring: Ring, frats, r: RatFn) -> RatFn:
    """d/dx along solutions, at the rational-function level."""
    m = ring.m
    out = r.derivative(0)
    for i in range(1, m + 1):
        dy = r.derivative(ring.slot_y(i))
        if not dy.is_zero:
            out = out + RatFn.variable(ring, ring.slot_p(i)) * dy
        dp = r.derivative(ring.slot_p(i))
        if not dp.is_zero:
            out = out + RatFn.variable(ring, ring.slot_q(i)) * dp
        dq = r.derivative(ring.slot_q(i))
        if not dq.is_zero:
            out = out + frats[i - 1] * dq
    return out


def total_derivative(sys: OdeSystem, e: Expr) -> Expr:
    """D e = e_x + p_i e_{y_i} + q_i e_{p_i} + f^i e_{q_i}."""
    ring = sys.ring
    r = total_derivative_ratfn(ring, sys.f_ratfns(ring), to_ratfn(e, ring))
    return ratfn_to_expr(r)


# --------------------------------------------------------------------------
# affine point transformations
# --------------------------------------------------------------------------

def _det(A) -> Fraction:
    n = len(A)
    M = [list(map(Fraction, row)) for row in A]
    det = Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            det = -det
        det *= M[c][c]
        inv = 1 / M[c][c]
        for r in range(c + 1, n):
            if M[r][c]:
                fac = M[r][c] * inv
                for k in range(c, n):
                    M[r][k] -= fac * M[c][k]
    return det


def _inverse(A):
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(A)]
    for c in range(n):
        piv = next((r for r in range(c, n) if M[r][c] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        M[c], M[piv] = M[piv], M[c]
        inv = 1 / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for r in range(n):
            if r != c and M[r][c]:
                fac = M[r][c]
                M[r] = [v - fac * w for v, w in zip(M[r], M[c])]
    return tuple(tuple(row[n:]) for row in M)


@dataclass(frozen=True)
class AffineChange:
    """x -> lambda*x + x_shift, y -> A y + y_shift, with A invertible."""

    A: tuple
    lam: Fraction
    x_shift: Fraction = Fraction(0)
    y_shift: tuple = ()

    def __post_init__(self):
        A = tuple(tuple(Fraction(v) for v in row) for row in self.A)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "lam", Fraction(self.lam))
        object.__setattr__(self, "x_shift", Fraction(self.x_shift))
        shift = tuple(Fraction(v) for v in self.y_shift) or tuple(Fraction(0) for _ in A)
        object.__setattr__(self, "y_shift", shift)
        if self.lam == 0:
            raise ValueError("x-scaling must be nonzero")
        if _det(A) == 0:
            raise ValueError("singular linear part")
        if len(shift) != len(A):
            raise ValueError("y_shift dimension mismatch")

    @property
    def m(self) -> int:
        return len(self.A)

    @staticmethod
    def identity(m: int) -> "AffineChange":
        return AffineChange(tuple(tuple(Fraction(int(i == j)) for j in range(m)) for i in range(m)),
                            Fraction(1))

    def compose(self, first: "AffineChange") -> "AffineChange":
        """self after first (apply `first`, then `self`)."""
        m = self.m
        A = tuple(tuple(sum(self.A[i][k] * first.A[k][j] for k in range(m))
                        for j in range(m)) for i in range(m))
        b = tuple(sum(self.A[i][k] * first.y_shift[k] for k in range(m)) + self.y_shift[i]
                  for i in range(m))
        return AffineChange(A, self.lam * first.lam,
                            self.lam * first.x_shift + self.x_shift, b)

    def apply_point(self, x, ys):
        """Image of a point (x, y) on the base."""
        nx = self.lam * x + self.x_shift
        ny = [sum(self.A[i][j] * ys[j] for j in range(self.m)) + self.y_shift[i]
              for i in range(self.m)]
        return nx, ny


def random_affine_change(m: int, rng: random.Random) -> AffineChange:
    while True:
        A = tuple(tuple(Fraction(rng.randint(-3, 3)) for _ in range(m)) for _ in range(m))
        if _det(A) != 0:
            break
    lam = Fraction(rng.choice([1, 2, 3, -1, -2]), rng.choice([1, 2]))
    shift_x = Fraction(rng.randint(-2, 2))
    shift_y = tuple(Fraction(rng.randint(-2, 2)) for _ in range(m))
    return AffineChange(A, lam, shift_x, shift_y)


def affine_transform(sys: OdeSystem, ch: AffineChange) -> OdeSystem:
    """The system satisfied by ybar = A y + b with xbar = lambda x + c.

    fbar(xbar, ybar, pbar, qbar) = lambda^-3 A f((xbar-c)/lambda,
    A^-1 (ybar-b), lambda A^-1 pbar, lambda^2 A^-1 qbar).
    """
    if ch.m != sys.m:
        raise ValueError("transform dimension mismatch")
    m = sys.m
    Ainv = _inverse(ch.A)
    lam, c, b = ch.lam, ch.x_shift, ch.y_shift
    mapping: dict[VarId, Expr] = {X: (as_expr(X) - c) * Fraction(1, 1) / lam}
    for i in range(1, m + 1):
        row = Ainv[i - 1]
        mapping[y_(i)] = sum((row[j] * (as_expr(y_(j + 1)) - b[j]) for j in range(m)),
                             as_expr(0))
        mapping[p_(i)] = lam * sum((row[j] * as_expr(p_(j + 1)) for j in range(m)), as_expr(0))
        mapping[q_(i)] = lam ** 2 * sum((row[j] * as_expr(q_(j + 1)) for j in range(m)), as_expr(0))
    ring = Ring(m)
    new_f = []
    for i in range(m):
        g = sum((ch.A[i][j] * substitute(sys.f[j], mapping) for j in range(m)), as_expr(0))
        g = as_expr(Fraction(1) / lam ** 3) * g
        new_f.append(ratfn_to_expr(to_ratfn(g, ring)))
    return OdeSystem(m, tuple(new_f))
