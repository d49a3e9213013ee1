from __future__ import annotations

import pytest

from gerstcalc import lie
from gerstcalc.diffalg import Poly, Var
from gerstcalc.errors import DegreeMismatch, InvalidStructure
from gerstcalc.gerstenhaber import check_calculus_axioms, check_gerstenhaber_axioms

Z = Poly.var(Var("z", 1))


def test_structure_constants_checked():
    with pytest.raises(InvalidStructure):
        lie.FinLieAlgebra(["e", "h", "f"], {(1, 0): {0: 2}, (1, 2): {2: 2}, (0, 2): {1: 1}})
    assert lie.sl2().jacobi_failure() is None


def test_bracket_with_function_is_minus_action():
    A = lie.r2_on_line()
    f = lie.chain(A, (), Z)
    X = lie.chain(A, (1,))
    assert lie.chain_bracket(f, X) == lie.chain(A, (), -1)
    assert lie.chain_bracket(lie.chain(A, (0,)), f) == lie.chain(A, (), -Z)


def test_schouten_in_r2():
    A = lie.trivial_algebra(lie.r2())
    e1, e2, e12 = lie.chain(A, (0,)), lie.chain(A, (1,)), lie.chain(A, (0, 1))
    assert lie.chain_bracket(e1, e12) == e12
    assert lie.chain_bracket(e2, e12).is_zero()
    assert lie.chain_bracket(e1, e2) == e2


def test_algebroid_bracket_cancels():
    A = lie.r2_on_line()
    assert lie.chain_bracket(lie.chain(A, (0,)), lie.chain(A, (1,), Z)).is_zero()


def test_contractions():
    A = lie.trivial_algebra(lie.r2())
    w = lie.LieCochain.basis(A, (0, 1))
    assert lie.contract(lie.chain(A, (0, 1)), w).values == {(): Poly.const(-1)}
    assert lie.contract(lie.chain(A, ()), w) == w
    with pytest.raises(DegreeMismatch):
        lie.contract(lie.chain(A, (0, 1)), lie.LieCochain.basis(A, (0,)))
    # into a 0-cochain the contraction is zero even in strict mode
    assert lie.contract(lie.chain(A, (0,)), lie.LieCochain(A, 0, {(): Poly.const(1)})).is_zero()


def test_lie_derivative_on_functions():
    A = lie.r2_on_line()
    f = lie.LieCochain(A, 0, {(): Z})
    X = lie.chain(A, (0,))
    assert lie.lie_derive(X, f)(()) == -Z
    assert lie.contract(X, lie.cochain_d(f))(()) == A.act(0, Z)


@pytest.mark.parametrize("A", [lie.trivial_algebra(lie.sl2()), lie.sl2_on_line(), lie.r2_on_line()],
                         ids=["sl2", "sl2-line", "r2-line"])
def test_d_squared(A):
    for c in lie.basis_cochains(A, A.g.dim, 2):
        assert lie.cochain_d(lie.cochain_d(c)).is_zero()


def test_vector_formula_matches_cartan():
    A = lie.sl2_on_line()
    chains = [c for c in lie.basis_chains(A, 1, 1) if c.degree == 1]
    for X in chains:
        for w in lie.basis_cochains(A, 2, 1):
            assert lie.lie_derive_vector(X, w) == lie.lie_derive(X, w)


def test_gerstenhaber_r2_line():
    A = lie.r2_on_line()
    rep = check_gerstenhaber_axioms(lie.chain_wedge, lie.chain_bracket, lie.basis_chains(A, 2, 1))
    assert rep.ok, rep.failures()[:3]


def test_flipped_structure_constant_breaks_jacobi():
    g = lie.FinLieAlgebra(["e", "h", "f"], {(1, 0): {0: 2}, (1, 2): {2: 2}, (0, 2): {1: 1}}, check=False)
    A = lie.trivial_algebra(g)
    rep = check_gerstenhaber_axioms(lie.chain_wedge, lie.chain_bracket, lie.basis_chains(A, 1),
                                    identities=["jacobi"])
    assert not rep.ok
    assert rep.summary()["jacobi"]["first_counterexample"] is not None


def test_calculus_r2_trivial():
    A = lie.trivial_algebra(lie.r2())
    calc = lie.build_lie_calculus(A)
    rep = check_calculus_axioms(calc, lie.basis_chains(A, 2), lie.basis_cochains(A, 2))
    assert rep.ok


def test_from_json():
    A = lie.from_json({"dim": 2, "basis": ["a", "b"],
                       "brackets": [{"i": 1, "j": 2, "coeffs": [{"k": 2, "c": 1}]}],
                       "action": [{"gen": 1, "images": ["-z"]}, {"gen": 2, "images": ["1"]}]})
    assert A.act(0, Z * Z) == -2 * Z * Z
    with pytest.raises(InvalidStructure):
        lie.from_json({"dim": 2, "brackets": [{"i": 1, "j": 2, "coeffs": [{"k": 2, "c": 1}]}],
                       "action": [{"gen": 1, "images": ["z"]}, {"gen": 2, "images": ["1"]}]})
