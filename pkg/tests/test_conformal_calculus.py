from __future__ import annotations

from math import factorial

import pytest

from gerstcalc import conformal as cf
from gerstcalc import conformal_calculus as cc
from gerstcalc.diffalg import Poly, Var, total_derivative, u
from gerstcalc.errors import DegreeMismatch, InsufficientOrder, NonzeroBracket
from gerstcalc.samples import random_chain, random_cochain, rng_for

L1, L2 = Poly.var(cc.lv(1)), Poly.var(cc.lv(2))
U, U1, U2 = u(1), u(1, 1), u(1, 2)


@pytest.fixture(scope="module")
def free1():
    R = cf.zero_lca(1)
    return R, cf.free_action(R)


def test_quotient_equality(free1):
    R, spec = free1
    c = cc.ConformalCochain(R, spec, 2, {(0, 0): L1 * U - L2 * U})
    g = U * U1 * (L1 - L2)
    c2 = cc.ConformalCochain(R, spec, 2, {(0, 0): (L1 - L2) * U + (L1 + L2) * g + total_derivative(g)})
    assert cc.cochain_equal(c, c2)
    one = lambda v: cc.ConformalCochain(R, spec, 1, {(0,): v})
    assert not cc.cochain_equal(one(U), one(U1))
    assert cc.cochain_equal(one(U1), one(-L1 * U))


def test_basic_complex_is_coefficientwise(free1):
    R, spec = free1
    a = cc.ConformalCochain(R, spec, 1, {(0,): U1}, basic=True)
    b = cc.ConformalCochain(R, spec, 1, {(0,): -L1 * U}, basic=True)
    assert a != b
    assert a.projected() == b.projected()


def test_d_squared_nonzero_bracket():
    rng = rng_for(3)
    vir = cf.virasoro()
    for spec in (cf.virasoro_density(1), cf.zero_action(vir, 1)):
        for k in range(3):
            c = random_cochain(rng, vir, spec, k)
            assert cc.cochain_d(cc.cochain_d(c)).is_zero()


def test_projection_commutes_with_d():
    rng = rng_for(5)
    vir = cf.virasoro()
    spec = cf.virasoro_density(1)
    for k in range(3):
        c = random_cochain(rng, vir, spec, k, basic=True)
        assert cc.cochain_d(c).projected() == cc.cochain_d(c.projected())


def test_zero_gauge_gives_zero_chain(free1):
    R, spec = free1
    assert cc.chain_expand(R, spec, [cc.ChainGauge((0,), {})], 4).is_zero()


def test_wedge_coefficient(free1):
    R, spec = free1
    X = cc.vector_chain(R, spec, [U], 4)
    Y = cc.vector_chain(R, spec, [U * U], 4)
    W = cc.chain_wedge(X, Y)
    assert W.coeffs[(0, 0)][(1, 0)] == -U * U * U1 / 2
    one = cc.chain_unit(R, spec, 4)
    assert cc.chain_wedge(one, X) == X


def test_bracket_of_vector_chains(free1):
    R, spec = free1
    X = cc.vector_chain(R, spec, [U], 8)
    Y = cc.vector_chain(R, spec, [U * U], 8)
    B = cc.chain_bracket(X, Y)
    assert B.trust >= 1
    assert B == cc.vector_chain(R, spec, [U * U], B.trust)


def test_bracket_needs_trust():
    vir = cf.virasoro()
    spec = cf.virasoro_density(1)
    X = random_chain(rng_for(1), vir, spec, 2, 1)
    with pytest.raises(InsufficientOrder):
        cc.chain_bracket(X, X, order=5)


def test_contractions(free1):
    R, spec = free1
    X = cc.vector_chain(R, spec, [U], 6)
    c = cc.ConformalCochain(R, spec, 1, {(0,): U2})
    assert cc.contract(X, c) == cc.ConformalCochain(R, spec, 0, {(): -U1 * U1})
    f = cc.ConformalCochain(R, spec, 0, {(): U})
    assert cc.contract(X, f).is_zero()
    with pytest.raises(DegreeMismatch):
        cc.contract(cc.chain_wedge(X, X), cc.ConformalCochain(R, spec, 1, {(0,): U}))


def test_lie_derivative_of_functional(free1):
    R, spec = free1
    X = cc.vector_chain(R, spec, [U1], 6)
    f = cc.ConformalCochain(R, spec, 0, {(): U * U / 2})
    assert cc.lie_derive(X, f).is_zero()
    g = cc.ConformalCochain(R, spec, 0, {(): U1 * U1 / 2})
    X = cc.vector_chain(R, spec, [U], 6)
    assert cc.lie_derive(X, g) == cc.ConformalCochain(R, spec, 0, {(): U1 * U1})


def test_explicit_lie_derivative_matches_cartan():
    rng = rng_for(9)
    vir = cf.virasoro()
    spec = cf.virasoro_density(1)
    for h in (0, 1, 2):
        X = random_chain(rng, vir, spec, h, 8)
        for k in (1, 2):
            c = random_cochain(rng, vir, spec, k)
            assert cc.lie_derive_explicit(X, c) == cc.lie_derive(X, c, strict=False)


def test_chain_differentials():
    rng = rng_for(2)
    R = cf.zero_lca(1)
    spec = cf.free_action(R)
    X = random_chain(rng, R, spec, 2, 6)
    assert cc.chain_d_zero_bracket(X).is_zero()
    vir = cf.virasoro()
    Y = random_chain(rng, vir, cf.zero_action(vir, 1), 2, 6)
    with pytest.raises(NonzeroBracket):
        cc.chain_d_zero_bracket(Y)
    d2 = cc.chain_d(cc.chain_d(random_chain(rng, vir, cf.zero_action(vir, 1), 3, 6)))
    assert d2.is_zero()


def test_json_inputs(free1):
    R, spec = free1
    c = cc.cochain_from_json(R, spec, {"degree": 2, "entries": [{"gens": [1, 1], "poly": "(l1 - l2)*u"}]})
    assert c == cc.ConformalCochain(R, spec, 2, {(0, 0): (L1 - L2) * U})
    X = cc.chain_from_json(R, spec, {"degree": 1, "trust_order": 3, "entries": [
        {"gens": [1], "mindex": [n], "poly": "u" + "'" * n + f"/{factorial(n)}"} for n in range(4)]})
    assert X == cc.vector_chain(R, spec, [U], 3)
