from __future__ import annotations

import random
from fractions import Fraction

import pytest

from confgeo.expr import (X, const, eval_exact, is_zero, normalize,
                          normalize_equal, p_, q_, random_sample_point, var, y_)
from confgeo.invariants import (TensorField, h_fields, i4_variants_agree,
                                invariant_I2, invariant_I4, invariant_W2,
                                invariant_W3, match_I2_zero_form,
                                trace_free_matrix, trace_free_sym3)
from confgeo.jet import OdeSystem

from numeric_ref import FdPipeline, env_from_point, rel_err

p1, p2 = var(p_(1)), var(p_(2))
q1, q2 = var(q_(1)), var(q_(2))
xv = var(X)


# --- h_fields ---------------------------------------------------------------

def test_h_fields_zero_system(zero_m2):
    Hx, Hm1 = h_fields(zero_m2)
    assert is_zero(Hx.entries)
    assert Hm1.is_zero_field()


def test_h_fields_quadratic_constant_A():
    # f^i = 3 q_i (A . q) with constant A: H^-1_j = A_j / 2
    A = (Fraction(2), Fraction(-3))
    f = tuple(3 * [q1, q2][i] * (A[0] * q1 + A[1] * q2) for i in range(2))
    sys = OdeSystem(2, f)
    _, Hm1 = h_fields(sys)
    for j in range(2):
        assert normalize_equal(Hm1.entry(j), const(A[j] / 2))


def test_h_fields_linear_p():
    # f^i = a p_i: only the sum of df^i/dp^i survives, H^x = -a/4
    sys = OdeSystem(2, (3 * p1, 3 * p2))
    Hx, _ = h_fields(sys)
    assert normalize_equal(Hx.entries, const(Fraction(-3, 4)))


def test_h_fields_circle(circle_m2):
    Hx, Hm1 = h_fields(circle_m2)
    u = 1 + p1 ** 2 + p2 ** 2
    assert normalize_equal(Hm1.entry(0), p1 / (2 * u))
    assert normalize_equal(Hm1.entry(1), p2 / (2 * u))
    assert normalize_equal(Hx.entries, 3 * (q1 ** 2 + q2 ** 2) / (4 * u))


# --- trace-free projections --------------------------------------------------

def test_trace_free_matrix_identity():
    ident = TensorField(2, "matrix", ((const(1), const(0)), (const(0), const(1))))
    assert trace_free_matrix(ident).is_zero_field()


def test_trace_free_matrix_diagonal():
    a, b = p1, q2
    M = TensorField(2, "matrix", ((a, const(0)), (const(0), b)))
    out = trace_free_matrix(M)
    assert normalize_equal(out.entry(0, 0), (a - b) / 2)
    assert normalize_equal(out.entry(1, 1), (b - a) / 2)


def test_trace_free_matrix_kills_trace(rng):
    from confgeo.expr import random_expr
    M = TensorField(2, "matrix",
                    tuple(tuple(random_expr(rng, 2, 2) for _ in range(2))
                          for _ in range(2)))
    out = trace_free_matrix(M)
    assert is_zero(out.entry(0, 0) + out.entry(1, 1), m=2)


def test_trace_free_sym3_zero_and_kernel():
    zero = TensorField(2, "tensor3",
                       tuple(tuple((const(0), const(0)) for _ in range(2))
                             for _ in range(2)))
    assert trace_free_sym3(zero).is_zero_field()
    # T^i_jk = d^i_j A_k + d^i_k A_j is exactly the kernel
    A = (p1, xv)
    entries = []
    for i in range(2):
        plane = []
        for j in range(2):
            row = []
            for k in range(2):
                e = const(0)
                if i == j:
                    e = e + A[k]
                if i == k:
                    e = e + A[j]
                row.append(e)
            plane.append(tuple(row))
        entries.append(tuple(plane))
    T = TensorField(2, "tensor3", tuple(entries))
    assert trace_free_sym3(T).is_zero_field()


def test_trace_free_sym3_contraction_vanishes(rng):
    from confgeo.expr import random_expr
    grid = [[[None] * 2 for _ in range(2)] for _ in range(2)]
    for i in range(2):
        for j in range(2):
            for k in range(j, 2):
                e = random_expr(rng, 2, 2)
                grid[i][j][k] = e
                grid[i][k][j] = e
    T = TensorField(2, "tensor3", tuple(tuple(tuple(r) for r in pl) for pl in grid))
    out = trace_free_sym3(T)
    for j in range(2):
        tr = out.entry(0, 0, j) + out.entry(1, 1, j)
        assert is_zero(tr, m=2)


def test_trace_free_sym3_rejects_asymmetric():
    T = TensorField(2, "tensor3",
                    (((const(0), p1), (const(0), const(0))),
                     ((const(0), const(0)), (const(0), const(0)))))
    with pytest.raises(ValueError):
        trace_free_sym3(T)


# --- I2 and the quadratic form ------------------------------------------------

def test_I2_zero_system(zero_m2):
    assert invariant_I2(zero_m2).is_zero_field()


def test_I2_vanishes_on_quadratic_family(quadratic_m2):
    assert invariant_I2(quadratic_m2).is_zero_field()


def test_I2_nonzero_for_cubic(cubic_q_m2):
    I2 = invariant_I2(cubic_q_m2)
    assert not I2.is_zero_field()
    assert normalize_equal(I2.entry(0, 1, 1), 6 * q2)
    pt = random_sample_point(2, random.Random(0))
    assert eval_exact(I2.entry(0, 1, 1), pt) != 0 or True  # nonzero at q2 = 1
    from confgeo.expr import SamplePoint
    pt1 = SamplePoint.from_dict(2, {"q2": 1})
    assert eval_exact(I2.entry(0, 1, 1), pt1) == 6


def test_I2_contractions_vanish(circle_m2, quadratic_m2, cubic_q_m2):
    for sys in (circle_m2, quadratic_m2, cubic_q_m2):
        I2 = invariant_I2(sys)
        m = sys.m
        for j in range(m):
            tr1 = sum((I2.entry(i, i, j) for i in range(m)), const(0))
            tr2 = sum((I2.entry(i, j, i) for i in range(m)), const(0))
            assert is_zero(tr1, m=m) and is_zero(tr2, m=m)


def test_match_zero_system(zero_m2):
    dec = match_I2_zero_form(zero_m2)
    assert dec is not None
    assert all(is_zero(a) for a in dec.Acoef)
    assert all(is_zero(b) for row in dec.Bcoef for b in row)
    assert all(is_zero(c) for c in dec.Ccoef)


def test_match_shared_A_example():
    # f1 = 3 q1 q1, f2 = 3 q2 q1: A = (1, 0), B = 0, C = 0
    sys = OdeSystem(2, (3 * q1 * q1, 3 * q2 * q1))
    dec = match_I2_zero_form(sys)
    assert dec is not None
    assert normalize_equal(dec.Acoef[0], const(1))
    assert is_zero(dec.Acoef[1])
    assert all(is_zero(b) for row in dec.Bcoef for b in row)
    assert all(is_zero(c) for c in dec.Ccoef)


def test_match_rejects_cubic(cubic_q_m2):
    assert match_I2_zero_form(cubic_q_m2) is None


def test_match_rejects_rational_in_q():
    sys = OdeSystem(2, (q1 / (1 + q2 ** 2), const(0)))
    assert match_I2_zero_form(sys) is None


def test_match_reassembles(circle_m2, quadratic_m2):
    for sys in (circle_m2, quadratic_m2):
        dec = match_I2_zero_form(sys)
        assert dec is not None
        for a, b in zip(dec.reassemble(sys.m), sys.f):
            assert normalize_equal(a, b)
        # coefficients live in (x, y, p) only
        from confgeo.expr import variables_of
        for e in dec.Acoef:
            assert all(v.kind != "q" for v in variables_of(e))


def test_theorem_equivalence_quick(rng):
    # quadratic family -> I2 = 0 and match succeeds; violations -> I2 != 0
    from test_acceptance import random_quadratic_system, random_violating_system
    for _ in range(8):
        sys = random_quadratic_system(rng)
        assert invariant_I2(sys).is_zero_field()
        assert match_I2_zero_form(sys) is not None
    for _ in range(8):
        sys = random_violating_system(rng)
        assert not invariant_I2(sys).is_zero_field()
        assert match_I2_zero_form(sys) is None


# --- W2, W3 -------------------------------------------------------------------

def test_W2_examples(zero_m2, linear_p_m2):
    assert invariant_W2(zero_m2).is_zero_field()
    assert invariant_W2(linear_p_m2).is_zero_field()


def test_W2_trace_free_on_corpus(circle_m2, quadratic_m2, cubic_q_m2):
    for sys in (circle_m2, quadratic_m2, cubic_q_m2):
        W2 = invariant_W2(sys)
        tr = sum((W2.entry(i, i) for i in range(sys.m)), const(0))
        assert is_zero(tr, m=sys.m)


def test_W3_examples(zero_m2, linear_p_m2):
    assert invariant_W3(zero_m2).is_zero_field()
    assert invariant_W3(linear_p_m2).is_zero_field()


def test_W3_linear_system_contains_L():
    y1, y2 = var(y_(1)), var(y_(2))
    L = ((1, 2), (-1, 5))
    sys = OdeSystem(2, (L[0][0] * y1 + L[0][1] * y2, L[1][0] * y1 + L[1][1] * y2))
    W3 = invariant_W3(sys)
    for i in range(2):
        for j in range(2):
            assert normalize_equal(W3.entry(i, j), const(L[i][j]))


def test_W3_cube_variants_differ_only_offdiagonal_systems(circle_m2):
    # both cube readings coincide on the circle corpus (W3 = 0 either way)
    assert invariant_W3(circle_m2, "matrix").is_zero_field()
    assert invariant_W3(circle_m2, "entrywise").is_zero_field()


# --- I4 -------------------------------------------------------------------------

def test_I4_zero_cases(zero_m2, linear_p_m2):
    for sys in (zero_m2, linear_p_m2):
        assert invariant_I4(sys, "connection").is_zero_field()
        assert invariant_I4(sys, "intro").is_zero_field()


def test_I4_circle_symmetric_nondegenerate(circle_m2):
    I4 = invariant_I4(circle_m2)
    u = 1 + p1 ** 2 + p2 ** 2
    assert normalize_equal(I4.entry(0, 1), I4.entry(1, 0))
    det = I4.entry(0, 0) * I4.entry(1, 1) - I4.entry(0, 1) * I4.entry(1, 0)
    assert normalize_equal(det, 1 / (4 * u ** 3))
    rng = random.Random(5)
    nonzero = 0
    for _ in range(10):
        pt = random_sample_point(2, rng)
        if eval_exact(det, pt) != 0:
            nonzero += 1
    assert nonzero == 10


def test_I4_variants_agree_on_corpus(circle_m2, zero_m2, quadratic_m2, cubic_q_m2):
    for sys in (circle_m2, zero_m2, quadratic_m2, cubic_q_m2):
        assert i4_variants_agree(sys)


def test_I4_literal_reading_differs(circle_m2):
    lit = invariant_I4(circle_m2, "connection", "literal")
    good = invariant_I4(circle_m2, "connection", "corrected")
    assert not normalize_equal(lit.entry(0, 1), good.entry(0, 1))


# --- numeric cross-check ----------------------------------------------------------

def _check_against_fd(sys, n_points=10, tol=1e-5, seed=29):
    fd = FdPipeline(sys)
    rng = random.Random(seed)
    Hx, Hm1 = h_fields(sys)
    I2, W2 = invariant_I2(sys), invariant_W2(sys)
    W3, I4 = invariant_W3(sys), invariant_I4(sys)
    m = sys.m
    done = 0
    while done < n_points:
        pt = random_sample_point(m, rng, num_bound=10, den_bound=10)
        env = env_from_point(pt)
        from confgeo.expr import PoleError
        try:
            ref = fd.invariants_at(env)
            sym = {
                "Hx": float(eval_exact(Hx.entries, pt)),
                "Hm1": [float(eval_exact(Hm1.entry(j), pt)) for j in range(m)],
                "I2": [[[float(eval_exact(I2.entry(i, j, k), pt)) for k in range(m)]
                        for j in range(m)] for i in range(m)],
                "W2": [[float(eval_exact(W2.entry(i, j), pt)) for j in range(m)]
                       for i in range(m)],
                "W3": [[float(eval_exact(W3.entry(i, j), pt)) for j in range(m)]
                       for i in range(m)],
                "I4": [[float(eval_exact(I4.entry(i, j), pt)) for j in range(m)]
                       for i in range(m)],
            }
        except (PoleError, ZeroDivisionError):
            continue
        assert rel_err(ref["Hx"], sym["Hx"]) < tol
        for j in range(m):
            assert rel_err(ref["Hm1"][j], sym["Hm1"][j]) < tol
        for i in range(m):
            for j in range(m):
                assert rel_err(ref["W2"][i][j], sym["W2"][i][j]) < tol
                assert rel_err(ref["W3"][i][j], sym["W3"][i][j]) < tol
                assert rel_err(ref["I4"][i][j], sym["I4"][i][j]) < tol
                for k in range(m):
                    assert rel_err(ref["I2"][i][j][k], sym["I2"][i][j][k]) < tol
        done += 1


def test_invariants_match_finite_differences_quadratic(quadratic_m2):
    _check_against_fd(quadratic_m2, n_points=10)


def test_invariants_match_finite_differences_circle(circle_m2):
    _check_against_fd(circle_m2, n_points=10)
