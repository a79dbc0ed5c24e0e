from __future__ import annotations

import random
from pathlib import Path

import pytest

from confgeo import OdeSystem, const, p_, q_, var, y_

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def circle_system(m: int) -> OdeSystem:
    ps = [var(p_(i)) for i in range(1, m + 1)]
    qs = [var(q_(i)) for i in range(1, m + 1)]
    u = 1 + sum(pi ** 2 for pi in ps)
    pq = sum(pi * qi for pi, qi in zip(ps, qs))
    return OdeSystem(m, tuple(3 * qi * pq / u for qi in qs))


@pytest.fixture(scope="session")
def circle_m2() -> OdeSystem:
    return circle_system(2)


@pytest.fixture(scope="session")
def circle_m3() -> OdeSystem:
    return circle_system(3)


@pytest.fixture(scope="session")
def zero_m2() -> OdeSystem:
    return OdeSystem(2, (const(0), const(0)))


@pytest.fixture(scope="session")
def linear_p_m2() -> OdeSystem:
    return OdeSystem(2, (3 * var(p_(1)), 3 * var(p_(2))))


@pytest.fixture(scope="session")
def cubic_q_m2() -> OdeSystem:
    return OdeSystem(2, (var(q_(2)) ** 3, const(0)))


@pytest.fixture(scope="session")
def quadratic_m2() -> OdeSystem:
    """A generic I2 = 0 system with nonconstant A, B, C (and W2 != 0)."""
    from confgeo.expr import X
    x = var(X)
    y1, y2 = var(y_(1)), var(y_(2))
    p1, p2 = var(p_(1)), var(p_(2))
    q1, q2 = var(q_(1)), var(q_(2))
    A = [p1 * y2 + 1, x * p2]
    B = [[y1, p1 * p2], [const(2), x ** 2]]
    C = [x * y1 * p2, p1 ** 3]
    qs = [q1, q2]
    f = tuple(3 * qs[i] * (A[0] * q1 + A[1] * q2) + B[i][0] * q1 + B[i][1] * q2 + C[i]
              for i in range(2))
    return OdeSystem(2, f)


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture()
def rng() -> random.Random:
    return random.Random(12345)
