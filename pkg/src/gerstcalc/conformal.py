"""Lie conformal algebras freely generated as F[d]-modules, and their modules.

An element sum_i P_i(d) a_i is a dict {generator: Poly}, the polynomials
being in the translation symbol ``D`` (and possibly in scalar lambda's).
The bracket table stores [a_i lambda a_j] = sum_k P_k(lambda, d) a_k using the
private lambda ``L0``; user-facing results use lambda_1, mu = lambda_2, ...
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import product
from math import comb, factorial

from .diffalg import (Poly, Var, coefficients_in, partial, substitute, total_derivative,
                      u_vars)
from .errors import InvalidStructure
from .gerstenhaber import Report

D = Var("d", 0)
L0 = Var("l", 0)
LAM = Var("l", 1)
MU = Var("l", 2)


def dpoly(*coeffs) -> Poly:
    """sum_q coeffs[q] d^q."""
    out = Poly()
    for q, c in enumerate(coeffs):
        out = out + Poly.var(D, q) * c
    return out


def _clean(x: dict) -> dict:
    return {k: v for k, v in x.items() if not v.is_zero()}


def elem_add(x: dict, y: dict, c=1) -> dict:
    out = dict(x)
    for k, v in y.items():
        out[k] = out.get(k, Poly()) + v * c
    return _clean(out)


def elem_scale(x: dict, c) -> dict:
    return _clean({k: v * c for k, v in x.items()})


def gen(k: int, p: Poly | int = 1) -> dict:
    return _clean({k: Poly.coerce(p)})


class LCAPresentation:
    """Free F[d]-module on named generators with a lambda-bracket table.

    table[(i, j)] = {k: P(L0, D)} (0-based generator indices).
    """

    def __init__(self, names: list[str], table: dict | None = None, torsion: dict | None = None):
        if torsion:
            raise InvalidStructure("torsion generators are not supported")
        self.names = list(names)
        self.rank = len(names)
        self.table = {}
        for (i, j), val in (table or {}).items():
            if not (0 <= i < self.rank and 0 <= j < self.rank):
                raise InvalidStructure(f"generator index out of range in ({i}, {j})")
            val = _clean({k: Poly.coerce(v) for k, v in val.items()})
            for p in val.values():
                if any(v not in (L0, D) for v in p.variables()):
                    raise InvalidStructure("table entries must be polynomials in lambda and d")
            if val:
                self.table[(i, j)] = val

    def entry(self, i: int, j: int) -> dict:
        return self.table.get((i, j), {})

    def is_zero(self) -> bool:
        return not self.table

    def max_lambda_degree(self) -> int:
        return max((p.degree_in("l") for v in self.table.values() for p in v.values()), default=0)

    def terms(self, i: int, j: int) -> list[tuple]:
        """Expand [a_i lambda a_j] as (coefficient, p, q, k) with c lambda^p d^q a_k."""
        out = []
        for k, p in self.entry(i, j).items():
            for m, c in p.terms.items():
                e = dict(m)
                out.append((c, e.get(L0, 0), e.get(D, 0), k))
        return out

    def __repr__(self):
        return f"LCAPresentation({self.names})"


def virasoro(weight: int = 2) -> LCAPresentation:
    """[L lambda L] = (d + weight*lambda) L, without central term."""
    return LCAPresentation(["L"], {(0, 0): {0: Poly.var(D) + Poly.var(L0) * weight}})


def current_sl2() -> LCAPresentation:
    """Cur(sl2) on (e, h, f): [a lambda b] = [a, b]."""
    one = Poly.const(1)
    t = {(1, 0): {0: one * 2}, (0, 1): {0: one * -2}, (1, 2): {2: one * -2}, (2, 1): {2: one * 2},
         (0, 2): {1: one}, (2, 0): {1: -one}}
    return LCAPresentation(["e", "h", "f"], t)


def zero_lca(rank: int, names: list[str] | None = None) -> LCAPresentation:
    return LCAPresentation(names or [f"u{i + 1}" for i in range(rank)])


def lambda_bracket(R: LCAPresentation, x: dict, y: dict, lam: Poly | Var = LAM) -> dict:
    """[x lam y] by sesquilinearity: [P(d)a lam Q(d)b] = P(-lam) Q(d+lam) [a lam b]."""
    lam = Poly.var(lam) if isinstance(lam, Var) else lam
    dd = Poly.var(D)
    out: dict = {}
    for i, P in x.items():
        Pm = substitute(P, {D: -lam})
        if Pm.is_zero():
            continue
        for j, Q in y.items():
            ent = R.entry(i, j)
            if not ent:
                continue
            Qs = substitute(Q, {D: dd + lam})
            pref = Pm * Qs
            for k, T in ent.items():
                out = elem_add(out, {k: pref * substitute(T, {L0: lam})})
    return out


def check_lca_axioms(R: LCAPresentation) -> Report:
    """Skewcommutativity and Jacobi on generator pairs and triples."""
    rep = Report()
    lam, mu, dd = Poly.var(LAM), Poly.var(MU), Poly.var(D)
    r = range(R.rank)
    for i, j in product(r, r):
        lhs = lambda_bracket(R, gen(i), gen(j), lam)
        rhs = lambda_bracket(R, gen(j), gen(i), LAM)
        rhs = {k: substitute(v, {LAM: -lam - dd}) for k, v in rhs.items()}
        res = elem_add(lhs, rhs)
        rep.add("skewcommutativity", (R.names[i], R.names[j]), not res, _fmt(R, res))
    for i, j, k in product(r, r, r):
        a, b, c = gen(i), gen(j), gen(k)
        left = elem_add(lambda_bracket(R, a, lambda_bracket(R, b, c, mu), lam),
                        lambda_bracket(R, b, lambda_bracket(R, a, c, lam), mu), -1)
        right = lambda_bracket(R, lambda_bracket(R, a, b, lam), c, lam + mu)
        res = elem_add(left, right, -1)
        rep.add("jacobi", (R.names[i], R.names[j], R.names[k]), not res, _fmt(R, res))
    return rep


def _fmt(R, x: dict) -> str:
    if not x:
        return ""
    return " + ".join(f"({v}){R.names[k]}" for k, v in sorted(x.items()))


def format_element(R: LCAPresentation, x: dict) -> str:
    return _fmt(R, x) or "0"


def jth_product(R: LCAPresentation, a: dict, b: dict, j: int) -> dict:
    """a_(j) b = j! times the coefficient of lambda^j in [a lambda b]."""
    br = lambda_bracket(R, a, b, LAM)
    out = {}
    for k, v in br.items():
        c = coefficients_in(v, LAM).get(j)
        if c is not None:
            out[k] = c * factorial(j)
    return _clean(out)


def ann_bracket(R: LCAPresentation, a: int, m: int, b: int, n: int) -> dict:
    """[a_m, b_n] = sum_j C(m, j) (a_(j) b)_{m+n-j} in the annihilation algebra.

    Returns {(generator, index): coefficient}; (d^q c)_s = (-1)^q s!/(s-q)! c_{s-q}.
    """
    out: dict = {}
    for j in range(m + 1):
        prod_ = jth_product(R, gen(a), gen(b), j)
        s = m + n - j
        for k, p in prod_.items():
            for q, c in coefficients_in(p, D).items():
                if q > s or c.is_zero():
                    continue
                coef = c.constant_term() * comb(m, j) * (-1) ** q * factorial(s) // factorial(s - q)
                key = (k, s - q)
                out[key] = out.get(key, 0) + coef
    return {k: v for k, v in out.items() if v != 0}


# modules over V = R_l

class ModuleSpec:
    """lambda-action of the generators on a differential polynomial algebra V.

    table[i][j] = a_{i L0} u_j, a polynomial in L0 and the u-variables; the
    action extends by a_lam(d f) = (d + lam) a_lam f and the Leibniz rule.
    """

    def __init__(self, kind: str, rank: int, ngens: int, table: list[list[Poly]] | None = None):
        self.kind = kind
        self.rank = rank
        self.ngens = ngens
        if kind == "zero":
            table = [[Poly() for _ in range(ngens)] for _ in range(rank)]
        elif kind == "free":
            if rank != ngens:
                raise InvalidStructure("the standard action needs as many generators as variables")
            table = [[Poly.const(int(i == j)) for j in range(ngens)] for i in range(rank)]
        elif table is None:
            raise InvalidStructure("custom action needs a table")
        if len(table) != rank or any(len(row) != ngens for row in table):
            raise InvalidStructure("action table has the wrong shape")
        for row in table:
            for p in row:
                if any(v.kind not in ("u",) and v != L0 for v in p.variables()):
                    raise InvalidStructure("action entries must be polynomials in lambda and u")
        self.table = table
        self._cache: dict = {}

    def is_zero(self) -> bool:
        return all(p.is_zero() for row in self.table for p in row)

    def max_lambda_degree(self) -> int:
        return max((p.degree_in("l") for row in self.table for p in row), default=0)

    def max_order(self) -> int:
        return max((p.max_order() for row in self.table for p in row), default=-1)

    def _image(self, i: int, v: Var) -> Poly:
        """(d + L0)^n T_ij(L0) for v = u_j^(n), in terms of L0."""
        key = (i, v)
        if key not in self._cache:
            T = self.table[i][v.index - 1]
            out = Poly()
            if not T.is_zero():
                l0 = Poly.var(L0)
                dT = T
                for t in range(v.order + 1):
                    out = out + dT * (l0 ** (v.order - t)) * comb(v.order, t)
                    dT = total_derivative(dT)
            self._cache[key] = out
        return self._cache[key]

    def act(self, i: int, f: Poly, lam: Poly | Var = LAM) -> Poly:
        """a_{i lam} f for f in V (other variables of f are scalars)."""
        lam = Poly.var(lam) if isinstance(lam, Var) else lam
        out = Poly()
        for v in u_vars(f):
            img = self._image(i, v)
            if img.is_zero():
                continue
            out = out + partial(f, v) * img
        if out.is_zero():
            return out
        return substitute(out, {L0: lam})

    def act_element(self, R: LCAPresentation, x: dict, f: Poly, lam: Poly | Var = LAM) -> Poly:
        """(P(d) a)_lam f = P(-lam) a_lam f."""
        lam = Poly.var(lam) if isinstance(lam, Var) else lam
        out = Poly()
        for i, P in x.items():
            out = out + substitute(P, {D: -lam}) * self.act(i, f, lam)
        return out


def zero_action(R: LCAPresentation, ngens: int) -> ModuleSpec:
    return ModuleSpec("zero", R.rank, ngens)


def free_action(R: LCAPresentation) -> ModuleSpec:
    return ModuleSpec("free", R.rank, R.rank)


def custom_action(R: LCAPresentation, ngens: int, table: list[list[Poly]]) -> ModuleSpec:
    return ModuleSpec("custom", R.rank, ngens, table)


def virasoro_density(weight: int = 1) -> ModuleSpec:
    """Virasoro acting on V = R_1 by L_lambda u = (d + weight*lambda) u."""
    u = Poly.var(Var("u", 1))
    return ModuleSpec("custom", 1, 1, [[total_derivative(u) + u * Poly.var(L0) * weight]])


def check_module_axioms(R: LCAPresentation, spec: ModuleSpec, samples: list[Poly]) -> Report:
    """Conditions a_lam d m = (d + lam) a_lam m and
    a_lam (b_mu m) - b_mu (a_lam m) = [a_lam b]_{lam+mu} m on samples."""
    rep = Report()
    lam, mu = Poly.var(LAM), Poly.var(MU)
    for n, m in enumerate(samples):
        for i in range(R.rank):
            lhs = spec.act(i, total_derivative(m), lam)
            rhs = total_derivative(spec.act(i, m, lam)) + lam * spec.act(i, m, lam)
            rep.add("module-d", (R.names[i], n), lhs == rhs, f"residual {lhs - rhs}")
        for i, j in product(range(R.rank), repeat=2):
            lhs = spec.act(i, spec.act(j, m, mu), lam) - spec.act(j, spec.act(i, m, lam), mu)
            br = lambda_bracket(R, gen(i), gen(j), lam)
            rhs = spec.act_element(R, br, m, lam + mu)
            rep.add("module-jacobi", (R.names[i], R.names[j], n), lhs == rhs,
                    f"residual {lhs - rhs}")
    return rep


# JSON input

def from_json(data) -> LCAPresentation:
    """{generators: [names], brackets: [{i, j, terms: [{c, p, q, k}]}]}, 1-based indices."""
    if isinstance(data, str):
        data = json.loads(data)
    names = data["generators"]
    table: dict = {}
    for b in data.get("brackets", []):
        ent = table.setdefault((b["i"] - 1, b["j"] - 1), {})
        for t in b.get("terms", []):
            k = t["k"] - 1
            term = Poly.var(L0, t.get("p", 0)) * Poly.var(D, t.get("q", 0)) * Fraction(str(t["c"]))
            ent[k] = ent.get(k, Poly()) + term
    return LCAPresentation(names, table)
