from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest

from confgeo.expr import X, const, is_zero, normalize, normalize_equal, p_, q_, var, y_
from confgeo.jet import (AffineChange, OdeSystem, affine_transform,
                         random_affine_change, total_derivative)
from confgeo.oracle import integrate_system
from confgeo.expr import random_expr

p1, q1 = var(p_(1)), var(q_(1))
xv = var(X)


def test_total_derivative_definitions(circle_m2, zero_m2, cubic_q_m2):
    for sys in (circle_m2, zero_m2, cubic_q_m2):
        for i in range(1, sys.m + 1):
            assert normalize_equal(total_derivative(sys, var(y_(i))), var(p_(i)))
            assert normalize_equal(total_derivative(sys, var(p_(i))), var(q_(i)))
            assert normalize_equal(total_derivative(sys, var(q_(i))), sys.f[i - 1])


def test_total_derivative_product_lift(zero_m2):
    assert normalize_equal(total_derivative(zero_m2, xv * p1), p1 + xv * q1)


def test_total_derivative_is_derivation(circle_m2, rng):
    for _ in range(100):
        a = random_expr(rng, 2, depth=2)
        b = random_expr(rng, 2, depth=2)
        lhs = (total_derivative(circle_m2, a * b)
               - a * total_derivative(circle_m2, b)
               - b * total_derivative(circle_m2, a))
        assert is_zero(lhs, m=2)


def test_identity_transform(circle_m2):
    t = affine_transform(circle_m2, AffineChange.identity(2))
    for a, b in zip(t.f, circle_m2.f):
        assert normalize_equal(a, b)


def test_zero_system_affine_invariant(zero_m2, rng):
    for _ in range(5):
        ch = random_affine_change(2, rng)
        t = affine_transform(zero_m2, ch)
        assert all(normalize(e).is_zero for e in t.f)


def test_singular_matrix_rejected():
    with pytest.raises(ValueError):
        AffineChange(((Fraction(1), Fraction(2)), (Fraction(2), Fraction(4))), 1)
    with pytest.raises(ValueError):
        AffineChange(((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))), 0)


def test_transform_composition(circle_m2, rng):
    c1 = random_affine_change(2, rng)
    c2 = random_affine_change(2, rng)
    t12 = affine_transform(affine_transform(circle_m2, c1), c2)
    tc = affine_transform(circle_m2, c2.compose(c1))
    for a, b in zip(t12.f, tc.f):
        assert normalize_equal(a, b)


def test_rotation_preserves_circle_verdict(circle_m2):
    # rotation together with an x-stretch: the checker verdict is unchanged
    from confgeo.conditions import check_conformal
    rot = AffineChange(((Fraction(3, 5), Fraction(-4, 5)),
                        (Fraction(4, 5), Fraction(3, 5))), Fraction(2))
    t = affine_transform(circle_m2, rot)
    v = check_conformal(t, with_ledger=False)
    assert v.conformal


def test_solution_transport(circle_m2, rng):
    """Integrating then transforming equals transforming then integrating."""
    done = 0
    attempts = 0
    while done < 20 and attempts < 60:
        attempts += 1
        ch = random_affine_change(2, rng)
        if ch.lam <= 0:
            continue
        tsys = affine_transform(circle_m2, ch)
        ic = [rng.uniform(-0.4, 0.4) for _ in range(6)]
        try:
            xs, ys = integrate_system(circle_m2, ic, (0.0, 1.0), samples=101)
        except RuntimeError:
            continue
        lam, c = float(ch.lam), float(ch.x_shift)
        A = np.array([[float(v) for v in row] for row in ch.A])
        b = np.array([float(v) for v in ch.y_shift])
        xbar = lam * xs + c
        ybar = ys @ A.T + b
        y0, pp, qq = np.array(ic[:2]), np.array(ic[2:4]), np.array(ic[4:])
        ic_bar = np.concatenate([A @ y0 + b, (A @ pp) / lam, (A @ qq) / lam ** 2])
        try:
            xs2, ys2 = integrate_system(tsys, ic_bar, (xbar[0], xbar[-1]), samples=101)
        except RuntimeError:
            continue
        assert np.max(np.abs(ys2 - ybar)) < 1e-6
        done += 1
    assert done == 20
