from __future__ import annotations

from fractions import Fraction

import pytest

from gerstcalc.diffalg import (Poly, Var, antiderivative, const, is_total_derivative, lam,
                               lambda_action, partial, partial_derivative, quotient_equal,
                               total_derivative, u, variational_derivative)
from gerstcalc.samples import random_diffpoly, rng_for

U, U1, U2 = u(1), u(1, 1), u(1, 2)


def test_product_and_inverse():
    assert (U * U).terms == {((Var("u", 1, 0), 2),): 1}
    f = U * U1 + 3
    assert (f + (-f)).terms == {}
    assert (U + U1) * (U - U1) == U * U - U1 * U1


def test_total_derivative():
    assert total_derivative(U) == U1
    assert total_derivative(const(Fraction(3, 2))).is_zero()
    assert total_derivative(U * U1) == U1 * U1 + U * U2
    assert total_derivative(U, 3) == u(1, 3)


def test_partials():
    assert partial_derivative(u(2), 1).is_zero()
    assert partial_derivative(U, 1, 0) == const(1)
    assert partial_derivative(U1 * U1, 1, 1) == 2 * U1
    assert partial(U * U2, Var("u", 1, 2)) == U


def test_lambda_action():
    L = lam(1)
    assert lambda_action(1, U) == const(1)
    assert lambda_action(1, u(2)).is_zero()
    assert lambda_action(1, U * U2) == U2 + L * L * U


@pytest.mark.parametrize("f, want", [
    (U * U1, Poly()),
    (U * U2, 2 * U2),
    (U1 * U1 / 2, -U2),
])
def test_variational_derivative(f, want):
    assert variational_derivative(f, 1) == want


def test_antiderivative():
    assert antiderivative(U * U1) == U * U / 2
    assert antiderivative(U) is None
    assert antiderivative(U2 * U1) == U1 * U1 / 2
    assert not is_total_derivative(U)
    assert is_total_derivative(const(0))


def test_quotient_equal():
    assert quotient_equal(U * U2, -U1 * U1)
    assert not quotient_equal(U, Poly())
    f = U * u(2, 1) + U2
    assert quotient_equal(f, f)


def test_euler_kills_total_derivatives_multicomponent():
    rng = rng_for(7)
    for _ in range(30):
        g = random_diffpoly(rng, 3, 3, 3, 4)
        f = total_derivative(g)
        assert all(variational_derivative(f, i).is_zero() for i in (1, 2, 3))
        h = antiderivative(f)
        assert h is not None and total_derivative(h) == f


def test_format():
    assert str(U * U2 * 2) == "2*u1*u1''"
    assert str(u(1, 4) - Fraction(1, 2)) == "-1/2 + u1(4)"
