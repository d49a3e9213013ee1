"""Cross-check of the Jacobi obstruction against a direct Hamiltonian test.

The oracle treats three characteristics P, Q, R as extra free generators and
checks that  sum_cyc  int P . (pr_{H R} H)(Q)  is a total derivative, where the
prolongation only differentiates the coefficients of H along u_1..u_l.
"""

from __future__ import annotations

import pytest

from gerstcalc import varcalc as vc
from gerstcalc.diffalg import Poly, Var, is_total_derivative, partial, total_derivative, u, u_vars

U, U1 = u(1), u(1, 1)
V, V1 = u(2), u(2, 1)


def _prolong(chars: list[Poly], f: Poly, l: int) -> Poly:
    out = Poly()
    for v in u_vars(f):
        if v.index <= l:
            out = out + partial(f, v) * total_derivative(chars[v.index - 1], v.order)
    return out


def oracle_is_poisson(H: vc.DiffOperatorMatrix) -> bool:
    l = H.l
    P = [u(l + i + 1) for i in range(l)]
    Q = [u(2 * l + i + 1) for i in range(l)]
    R = [u(3 * l + i + 1) for i in range(l)]

    def term(A, B, C):
        chars = H.apply(C)
        prH = vc.DiffOperatorMatrix.__new__(vc.DiffOperatorMatrix)
        prH.l = l
        prH.entries = {k: {n: _prolong(chars, h, l) for n, h in e.items()} for k, e in H.entries.items()}
        HB = prH.apply(B)
        return sum((a * b for a, b in zip(A, HB)), Poly())

    total = term(P, Q, R) + term(Q, R, P) + term(R, P, Q)
    return is_total_derivative(total)


def _op(l, entries):
    return vc.DiffOperatorMatrix(l, entries)


def _skew_part(l, entries):
    H = _op(l, entries)
    Hs = H + (-H.adjoint())
    return _op(l, {k: {n: h / 2 for n, h in e.items()} for k, e in Hs.entries.items()})


CASES = {
    "gfz": (_op(1, {(0, 0): {1: Poly.const(1)}}), True),
    "virasoro-magri": (_op(1, {(0, 0): {3: Poly.const(1), 1: 2 * U, 0: U1}}), True),
    "hydrodynamic": (_op(1, {(0, 0): {1: 2 * U, 0: U1}}), True),
    "hydrodynamic-sq": (_op(1, {(0, 0): {1: 2 * U * U, 0: 2 * U * U1}}), True),
    "u'd+du'": (_op(1, {(0, 0): {1: 2 * U1, 0: u(1, 2)}}), False),
    "ud3+d3u": (_skew_part(1, {(0, 0): {3: U}}), False),
    "2c-constant": (_op(2, {(0, 1): {1: Poly.const(1)}, (1, 0): {1: Poly.const(1)}}), True),
    "2c-semidirect": (_op(2, {(0, 0): {1: 2 * U, 0: U1}, (0, 1): {1: V},
                              (1, 0): {1: V, 0: V1}}), True),
    "2c-mixed": (_op(2, {(0, 0): {1: 2 * U, 0: U1}, (0, 1): {1: U},
                         (1, 0): {1: U, 0: U1}}), False),
    "2c-diag-vir": (_op(2, {(0, 0): {3: Poly.const(1), 1: 2 * U, 0: U1},
                            (1, 1): {1: Poly.const(1)}}), True),
}


@pytest.mark.parametrize("name", list(CASES))
def test_jacobiator_agrees_with_oracle(name):
    H, expected = CASES[name]
    assert H.is_skew_adjoint()
    assert oracle_is_poisson(H) is expected
    assert vc.check_poisson(H).poisson is expected


@pytest.mark.parametrize("a, b", [("gfz", "virasoro-magri"), ("gfz", "hydrodynamic"),
                                  ("virasoro-magri", "hydrodynamic-sq"),
                                  ("2c-constant", "2c-semidirect"), ("hydrodynamic", "hydrodynamic-sq"),
                                  ("2c-semidirect", "2c-diag-vir")])
def test_compatibility_agrees_with_oracle(a, b):
    H1, H2 = CASES[a][0], CASES[b][0]
    assert vc.check_compatible(H1, H2).poisson is oracle_is_poisson(H1 + H2)


def test_non_skew_rejected():
    with pytest.raises(Exception) as e:
        vc.check_poisson(_op(1, {(0, 0): {2: U}}))
    assert getattr(e.value, "code", None) == "E_SKEWADJ"
