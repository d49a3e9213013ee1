from __future__ import annotations

from dataclasses import replace

import pytest

from gerstcalc import lie
from gerstcalc.errors import NotChainMap
from gerstcalc.gerstenhaber import (adjoint_calculus, check_calculus_axioms, check_epsilon_rule,
                                    check_morphism, extend_contraction, extend_lie_derivative_epsilon,
                                    identity, lie_derivative_closed_form, reduced_calculus, sgn,
                                    sort_sign)


def test_sort_sign():
    assert sort_sign((2, 0, 1)) == (1, (0, 1, 2))
    assert sort_sign((1, 0)) == (-1, (0, 1))
    assert sort_sign((1, 1))[0] == 0
    assert sgn(3) == -1 and sgn(-2) == 1


@pytest.fixture(scope="module")
def sl2line():
    A = lie.sl2_on_line()
    return A, lie.build_lie_calculus(A), lie.basis_chains(A, 2, 1), lie.basis_cochains(A, 3, 1)


def test_empty_wedge_is_identity(sl2line):
    A, calc, chains, forms = sl2line
    op = extend_contraction(lambda x: (lambda w: w), [])
    assert op is identity


@pytest.mark.parametrize("builder", [extend_lie_derivative_epsilon, lie_derivative_closed_form])
def test_epsilon_extension_matches_calculus(sl2line, builder):
    A, calc, _, forms = sl2line
    gens = [lie.chain(A, (a,)) for a in range(3)]
    iota = lambda x: (lambda w: calc.contract(x, w))
    L = lambda x: (lambda w: calc.lie(x, w))
    for m in (1, 2, 3):
        X = gens[0]
        for g in gens[1:m]:
            X = X.wedge(g)
        op = builder(iota, L, calc.bracket, 0, gens[:m])
        for w in forms[::5]:
            assert op(w) == calc.lie(X, w)


def test_epsilon_zero_two_factors(sl2line):
    A, calc, _, forms = sl2line
    X1, X2 = lie.chain(A, (0,)), lie.chain(A, (2,), 1)
    for w in forms[::4]:
        want = calc.contract(X1, calc.lie(X2, w)) - calc.lie(X1, calc.contract(X2, w))
        assert calc.lie(X1.wedge(X2), w) == want


def test_adjoint_needs_eps_one(sl2line):
    A, _, chains, _ = sl2line
    adj = adjoint_calculus(lie.chain_wedge, lie.chain_bracket)
    small = chains[:12]
    assert check_epsilon_rule(adj, 1, small, small[:4]).ok
    assert not check_epsilon_rule(adj, 0, small, small[:4]).ok


def test_mutated_differential_breaks_cartan(sl2line):
    A, calc, chains, forms = sl2line
    bad = replace(calc, d=lambda w: lie.cochain_d(w) * 2)
    rep = check_calculus_axioms(bad, chains[:8], forms[:8], pairs=[], identities=["cartan"])
    assert not rep.ok
    assert rep.summary()["cartan"]["fail_count"] > 0


def test_reduced_by_zero_is_identity(sl2line):
    A, calc, chains, forms = sl2line
    red = reduced_calculus(calc, lambda w: w * 0, samples=forms[:5])
    X, w = chains[5], forms[7]
    assert red.lie(X, w).rep == calc.lie(X, w)
    assert check_calculus_axioms(red, chains[:6], forms[:6], pairs=[(1, 2), (3, 4)]).ok


def test_reduced_rejects_non_chain_map(sl2line):
    A, calc, chains, forms = sl2line
    z = A.parse("z")
    times_z = lambda w: lie.LieCochain(w.A, w.degree, {k: v * z for k, v in w.values.items()})
    with pytest.raises(NotChainMap):
        reduced_calculus(calc, times_z, samples=forms)


def test_morphism_identity_and_mutation(sl2line):
    A, calc, chains, forms = sl2line
    ident = lambda x: x
    assert check_morphism(ident, ident, calc, calc, chains[:6], forms[:10]).ok
    doubled = lambda w: w * 2 if w.degree > 0 else w
    rep = check_morphism(ident, doubled, calc, calc, chains[:10], forms[:10], gerst=False)
    assert rep.summary()["psi-iota"]["fail_count"] > 0
