from __future__ import annotations

import pytest

from gerstcalc import conformal as cf
from gerstcalc import conformal_calculus as cc
from gerstcalc import varcalc as vc
from gerstcalc.diffalg import Poly, Var, u
from gerstcalc.diffalg import total_derivative as td
from gerstcalc.errors import DegreeMismatch, InsufficientOrder, InvalidStructure, SkewAdjointViolation
from gerstcalc.gerstenhaber import check_calculus_axioms, check_epsilon_rule
from gerstcalc.samples import random_chain, random_form, rng_for

U, U1, U2 = u(1), u(1, 1), u(1, 2)
V0, V1, V2, V3 = (Var("u", 1, n) for n in range(4))
F = vc.DeRhamForm


def du(n=0, i=1):
    return F.du(1 if i == 1 else 2, i, n)


def test_de_rham_d():
    assert vc.deRham_d(F.function(1, U * U / 2)) == F.function(1, U).wedge(du())
    assert str(vc.deRham_d(F.function(1, U * U / 2))) == "u1*du1"
    w = F.function(1, U).wedge(du(1))
    assert vc.deRham_d(w) == du().wedge(du(1))
    rng = rng_for(4)
    for k in range(3):
        w = random_form(rng, 2, k)
        assert vc.deRham_d(vc.deRham_d(w)).is_zero()


def test_contraction_and_brackets():
    w = du().wedge(du(1))
    assert vc.form_contract(vc.PolyVectorField.partial(1, V0), w) == du(1)
    X = vc.PolyVectorField.partial(1, V0)
    Y = vc.PolyVectorField.partial(1, V1, coef=U)
    assert vc.polyvector_schouten(X, Y) == vc.PolyVectorField.partial(1, V1)
    A = vc.PolyVectorField.partial(1, V0, coef=U)
    B = vc.PolyVectorField.partial(1, V1)
    assert vc.polyvector_schouten(A, B).is_zero()
    with pytest.raises(DegreeMismatch):
        vc.form_contract(X.wedge(Y), du())


def test_total_derivative_on_fields():
    assert vc.polyvector_del(vc.PolyVectorField.partial(1, V3)) == -vc.PolyVectorField.partial(1, V2)
    assert vc.polyvector_del(vc.PolyVectorField(1)).is_zero()
    assert not vc.is_evolutionary(vc.PolyVectorField.partial(1, V0, coef=U))
    # constant fields on the generators themselves commute with d/dx
    assert vc.is_evolutionary(vc.PolyVectorField.partial(1, V0))


def test_phi_of_vector_chain():
    R, spec = vc.variational_setting(1)
    X = cc.vector_chain(R, spec, [U], 2)
    P = vc.Phi(X, 2)
    want = sum((vc.PolyVectorField.partial(1, v, coef=u(1, v.order)) for v in (V0, V1, V2)),
               vc.PolyVectorField(1))
    assert P.terms == want.terms
    assert vc.is_evolutionary(P)
    assert vc.Phi(cc.TruncatedChain(R, spec, 1, 3)).is_zero()
    vir = cf.virasoro()
    with pytest.raises(InvalidStructure):
        vc.Phi(cc.vector_chain(vir, cf.zero_action(vir, 1), [U], 2))
    with pytest.raises(InsufficientOrder):
        vc.Phi(X, 5)


def test_psi():
    c = vc.Psi(du().wedge(du(1)))
    L1, L2 = Poly.var(cc.lv(1)), Poly.var(cc.lv(2))
    assert c.value_at((0, 0), [L1, L2]) == L2 - L1
    rng = rng_for(8)
    for _ in range(10):
        w = random_form(rng, 2, rng.randint(0, 2))
        assert vc.Psi(vc.form_del(w)).is_zero()


def test_local_operator_evaluation():
    S = vc.LocalOperator.from_form(F.function(1, U2).wedge(du()))
    val = vc.eval_local(S, vc.EvVectorField([U]))
    assert val.is_zero() is False
    assert (val - vc.integral_class(-U1 * U1)).is_zero()
    assert str(val) == "[u1*u1'']"
    assert vc.eval_local(vc.LocalOperator(1, 1), vc.EvVectorField([U])).is_zero()


def test_variational_differential():
    S = vc.LocalOperator.from_form(F.function(1, U1 * U1 / 2))
    dS = vc.local_op_d(S)
    assert dS == vc.LocalOperator.from_form(F.function(1, U1).wedge(du(1)))
    assert (vc.eval_local(dS, vc.EvVectorField([U * U])) - vc.integral_class(2 * U * U1 * U1)).is_zero()
    assert vc.local_op_d(dS).is_zero()


def test_variational_calculus_axioms():
    rng = rng_for(12)
    R, spec = vc.variational_setting(1)
    calc = vc.build_variational_calculus()
    fields = [vc.Phi(random_chain(rng, R, spec, h, 7)) for h in (0, 1, 1, 2)]
    ops = [vc.LocalOperator.from_form(random_form(rng, 1, k)) for k in (0, 1, 2)]
    assert check_calculus_axioms(calc, fields, ops, pairs=[(1, 2), (2, 1), (1, 3)]).ok
    assert check_epsilon_rule(calc, 0, fields, ops, pairs=[(1, 2), (2, 3)]).ok


def test_local_formulas_match_conformal():
    rng = rng_for(13)
    R, spec = vc.variational_setting(2)
    for h in (1, 2):
        X = random_chain(rng, R, spec, h, 7)
        for k in (1, 2):
            S = vc.LocalOperator.from_form(random_form(rng, 2, k, max_order=1))
            if h > k:
                continue
            assert vc.local_op_contract(X, S).cochain == cc.contract(X, S.cochain)
            assert vc.local_op_lie_derive(X, S).cochain == cc.lie_derive_explicit(X, S.cochain)


def test_operators():
    one = {1: Poly.const(1)}
    H = vc.DiffOperatorMatrix(1, {(0, 0): one})
    chain, gauges = vc.bivector_from_operator(H, 4)
    assert gauges[0].psi == {(1,): Poly.const(1) / 2}
    Z, gz = vc.bivector_from_operator(vc.DiffOperatorMatrix(1), 4)
    assert Z.is_zero() and gz == []
    with pytest.raises(SkewAdjointViolation) as e:
        vc.bivector_from_operator(vc.DiffOperatorMatrix(1, {(0, 0): {1: U}}), 4)
    assert e.value.entry == (1, 1)
    adj = vc.DiffOperatorMatrix(1, {(0, 0): {1: U}}).adjoint()
    assert adj == vc.DiffOperatorMatrix(1, {(0, 0): {1: -U, 0: -U1}})


def test_poisson_classics():
    gfz = vc.DiffOperatorMatrix(1, {(0, 0): {1: Poly.const(1)}})
    vir = vc.DiffOperatorMatrix(1, {(0, 0): {3: Poly.const(1), 1: 2 * U, 0: U1}})
    assert vc.check_poisson(gfz).poisson
    v = vc.check_poisson(vir, 8)
    assert v.poisson and v.order == 8 and not v.obstruction
    assert vc.check_compatible(gfz, vir).poisson
    with pytest.raises(InsufficientOrder):
        vc.check_poisson(vir, 3)
    v = vc.check_poisson(_sym(U))
    assert not v.poisson and v.first_nonzero


def _sym(a):
    """a d^3 + d^3 a: skew-adjoint, not Poisson for a = u."""
    return vc.DiffOperatorMatrix(1, {(0, 0): {3: 2 * a, 2: 3 * td(a), 1: 3 * td(a, 2), 0: td(a, 3)}})


def test_json_loaders():
    w = vc.form_from_json({"ngens": 1, "degree": 2, "terms": [{"poly": "u", "du": ["u", "u'"]}]})
    assert w == F.function(1, U).wedge(du()).wedge(du(1))
    X = vc.polyvector_from_json({"ngens": 1, "degree": 2,
                                 "terms": [{"poly": "1", "partials": ["u'", "u"]}]})
    assert X == vc.PolyVectorField.partial(1, V0, V1, coef=-1)
    H = vc.operator_from_json({"l": 1, "entries": [{"i": 1, "j": 1, "terms": [{"poly": "1", "dpow": 1}]}]})
    assert H.entry(0, 0) == {1: Poly.const(1)}
    with pytest.raises(InvalidStructure):
        vc.form_from_json({"ngens": 1, "degree": 1, "terms": [{"poly": "1", "du": ["u*u"]}]})


def test_probe():
    S = vc.LocalOperator.from_form(F.function(1, U2).wedge(du()))
    X = vc.find_probe(S)
    assert X is not None and not vc.eval_local(S, X[0] if len(X) == 1 else X).is_zero()
