"""Setting-independent Gerstenhaber and calculus machinery.

Elements handled here only need ``+``, ``-``, scalar ``*``, ``is_zero()`` and
a ``degree`` attribute.  Parities are degrees mod 2 because every base
generator is even.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Callable, Hashable, Iterable

from .diffalg import Poly
from .errors import MixedAlgebroid, NotChainMap


def sgn(n: int) -> int:
    return -1 if n % 2 else 1


def sort_sign(seq) -> tuple[int, tuple]:
    """Sign of the permutation sorting seq, and the sorted tuple (sign 0 on repeats)."""
    s = list(seq)
    sign = 1
    for i in range(1, len(s)):
        j = i
        while j > 0 and s[j - 1] > s[j]:
            s[j - 1], s[j] = s[j], s[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(s, s[1:]):
        if a == b:
            return 0, tuple(s)
    return sign, tuple(s)


# reports

@dataclass
class Report:
    records: list = field(default_factory=list)

    def add(self, identity: str, sample: Any, ok: bool, detail: str = "") -> None:
        self.records.append((identity, str(sample), bool(ok), detail))

    def extend(self, other: "Report") -> "Report":
        self.records.extend(other.records)
        return self

    @property
    def ok(self) -> bool:
        return all(r[2] for r in self.records)

    def failures(self) -> list:
        return [r for r in self.records if not r[2]]

    def lines(self) -> list[str]:
        return [f"{'PASS' if ok else 'FAIL'} {name} {sample}" for name, sample, ok, _ in self.records]

    def summary(self) -> dict:
        out: dict = {}
        for name, sample, ok, detail in self.records:
            s = out.setdefault(name, {"identity": name, "pass_count": 0, "fail_count": 0,
                                      "first_counterexample": None})
            if ok:
                s["pass_count"] += 1
            else:
                s["fail_count"] += 1
                if s["first_counterexample"] is None:
                    s["first_counterexample"] = {"sample": sample, "detail": detail}
        return out

    def to_json(self) -> str:
        return json.dumps(list(self.summary().values()), indent=2, ensure_ascii=False)

    def __str__(self):
        return "\n".join(self.lines())


def _check(report: Report, name: str, sample, lhs, rhs=None) -> bool:
    diff = lhs if rhs is None else lhs - rhs
    ok = diff.is_zero()
    report.add(name, sample, ok, "" if ok else f"residual {diff}")
    return ok


# Lie algebroids over polynomial algebras and the Schouten bracket

class Algebroid:
    """A Lie algebroid (g, A) with g free over A on sortable labels.

    bracket(i, j) -> {label: Poly} gives [e_i, e_j]; act(i, f) gives e_i(f).
    """

    def __init__(self, bracket: Callable, act: Callable, name: str = "", label: Callable = str):
        self._bracket = bracket
        self._act = act
        self.name = name or f"algebroid-{id(self):x}"
        self.label = label

    def bracket(self, i, j) -> dict:
        return self._bracket(i, j)

    def act(self, i, f: Poly) -> Poly:
        return self._act(i, f)


class Multivector:
    """Element of S_A(Pi g): a map from strictly increasing label tuples to A."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: Algebroid, terms: dict | None = None):
        self.alg = alg
        self.terms = {k: v for k, v in (terms or {}).items() if not Poly.coerce(v).is_zero()}
        for k in self.terms:
            self.terms[k] = Poly.coerce(self.terms[k])

    @classmethod
    def from_wedge(cls, alg, labels, coef=1) -> "Multivector":
        s, key = sort_sign(labels)
        if s == 0:
            return cls(alg)
        return cls(alg, {key: Poly.coerce(coef) * s})

    @property
    def degree(self) -> int:
        degs = {len(k) for k in self.terms}
        if len(degs) > 1:
            raise ValueError("inhomogeneous multivector")
        return degs.pop() if degs else 0

    def degrees(self) -> set[int]:
        return {len(k) for k in self.terms}

    def _same(self, other):
        if other.alg is not self.alg:
            raise MixedAlgebroid("operands come from different algebroids")

    def __add__(self, other):
        if isinstance(other, (int,)) and other == 0:
            return self
        self._same(other)
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, Poly()) + v
        return Multivector(self.alg, t)

    __radd__ = __add__

    def __neg__(self):
        return Multivector(self.alg, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        c = Poly.coerce(c)
        return Multivector(self.alg, {k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, Multivector) and (self - other).is_zero()

    def homogeneous_parts(self) -> dict[int, "Multivector"]:
        out: dict = {}
        for k, v in self.terms.items():
            out.setdefault(len(k), {})[k] = v
        return {d: Multivector(self.alg, t) for d, t in out.items()}

    def wedge(self, other: "Multivector") -> "Multivector":
        self._same(other)
        t: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                s, key = sort_sign(k1 + k2)
                if s:
                    t[key] = t.get(key, Poly()) + v1 * v2 * s
        return Multivector(self.alg, t)

    def bracket(self, other: "Multivector") -> "Multivector":
        return schouten_bracket(self, other)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for k in sorted(self.terms, key=lambda t: (len(t), t)):
            w = "∧".join(self.alg.label(x) for x in k) or "1"
            parts.append(f"({self.terms[k]})⊗{w}")
        return " + ".join(parts)

    __repr__ = __str__


def _omit(t: tuple, i: int) -> tuple:
    return t[:i] + t[i + 1:]


def _acc(out: dict, labels: tuple, coef: Poly) -> None:
    if coef.is_zero():
        return
    s, key = sort_sign(labels)
    if s:
        out[key] = out.get(key, Poly()) + coef * s


def schouten_bracket(X: Multivector, Y: Multivector) -> Multivector:
    """Canonical Gerstenhaber bracket on S_A(Pi g) extending the algebroid bracket.

    For monomials fX, gY with X, Y wedges of basis labels:
    [fX, gY] = (-1)^|X| f [g, X] Y + f g [X, Y] - (-1)^((|X|-1)(|Y|-1)+|Y|) g [f, Y] X,
    [g, X] = sum_i (-1)^i X_i(g) X^(i),
    [X, Y] = sum_ij (-1)^(i+j) [X_i, Y_j] X^(i) Y^(j).
    """
    X._same(Y)
    alg = X.alg
    out: dict = {}
    for x, f in X.terms.items():
        for y, g in Y.terms.items():
            a, b = len(x), len(y)
            s1 = sgn(a)
            for i in range(a):
                c = alg.act(x[i], g)
                if not c.is_zero():
                    _acc(out, _omit(x, i) + y, f * c * (s1 * sgn(i + 1)))
            fg = f * g
            for i in range(a):
                for j in range(b):
                    br = alg.bracket(x[i], y[j])
                    if not br:
                        continue
                    s = sgn(i + j + 2)
                    rest = _omit(x, i) + _omit(y, j)
                    for k, c in br.items():
                        _acc(out, (k,) + rest, fg * c * s)
            s3 = -sgn((a - 1) * (b - 1) + b)
            for j in range(b):
                c = alg.act(y[j], f)
                if not c.is_zero():
                    _acc(out, _omit(y, j) + x, g * c * (s3 * sgn(j + 1)))
    return Multivector(alg, out)


# operator extensions

def compose(*ops: Callable) -> Callable:
    def run(w):
        for op in reversed(ops):
            w = op(w)
        return w
    return run


def identity(w):
    return w


def extend_contraction(iota_gen: Callable, gens: Iterable, coef_mul: Callable | None = None, coef=None) -> Callable:
    """iota of coef * X_1 ^ ... ^ X_m as coef * iota_{X_1} o ... o iota_{X_m}."""
    ops = [iota_gen(x) for x in gens]
    op = compose(*ops) if ops else identity
    if coef_mul is None or coef is None:
        return op
    return lambda w: coef_mul(coef, op(w))


def cartan_lie_derivative(iota_X: Callable, d: Callable, deg: int) -> Callable:
    """L_X = iota_X d - (-1)^deg d iota_X."""
    s = sgn(deg)

    def L(w):
        a = iota_X(d(w))
        b = d(iota_X(w))
        return a - b if s == 1 else a + b

    return L


def _lin(terms):
    """Sum a list of (coefficient, value) pairs, skipping empty lists."""
    out = None
    for c, v in terms:
        v = v * c if c != 1 else v
        out = v if out is None else out + v
    return out


def extend_lie_derivative_epsilon(iota_gen: Callable, lie_gen: Callable, bracket_gen: Callable,
                                  eps, gens: list) -> Callable:
    """Lie derivative of X_1 ^ ... ^ X_m from generator data by the eps-right Leibniz rule.

    Recursion on the last factor Y (degree 1):
    L_{X'^Y} = iota_{X'} L_Y - L_{X'} iota_Y + eps iota_{[X', Y]},
    with [X_1 ^ ... ^ X_{m-1}, Y] = sum_i X_1 ^ .. [X_i, Y] .. ^ X_{m-1}.
    """
    m = len(gens)
    if m == 0:
        return lambda w: w * 0
    if m == 1:
        return lie_gen(gens[0])
    head, y = gens[:-1], gens[-1]
    L_head = extend_lie_derivative_epsilon(iota_gen, lie_gen, bracket_gen, eps, head)
    i_head = extend_contraction(iota_gen, head)
    L_y, i_y = lie_gen(y), iota_gen(y)
    corr = [extend_contraction(iota_gen, head[:i] + [bracket_gen(head[i], y)] + head[i + 1:])
            for i in range(len(head))]

    def L(w):
        terms = [(1, i_head(L_y(w))), (-1, L_head(i_y(w)))]
        if eps:
            terms += [(eps, c(w)) for c in corr]
        return _lin(terms)

    return L


def lie_derivative_closed_form(iota_gen: Callable, lie_gen: Callable, bracket_gen: Callable,
                               eps, gens: list) -> Callable:
    """Explicit expansion of the eps-rule for even generators.

    L_X = sum_i (-1)^(m+i) iota_1 .. L_i .. iota_m
          - eps sum_{i<j} (-1)^(m+j+1) iota_1 .. iota_{[X_i,X_j]} (slot i) .. (omit j) .. iota_m
    """
    m = len(gens)
    terms = []
    for i in range(m):
        ops = [iota_gen(x) for x in gens]
        ops[i] = lie_gen(gens[i])
        terms.append((sgn(m + i + 1), compose(*ops)))
    if eps:
        for i in range(m):
            for j in range(i + 1, m):
                g = list(gens)
                g[i] = bracket_gen(gens[i], gens[j])
                del g[j]
                terms.append((-eps * sgn(m + j + 2), extend_contraction(iota_gen, g)))

    def L(w):
        if not terms:
            return w * 0
        return _lin([(c, op(w)) for c, op in terms])

    return L


# calculus structures

@dataclass
class Calculus:
    """A Gerstenhaber algebra G acting on a complex (Omega, d) by iota and L."""

    wedge: Callable
    bracket: Callable
    d: Callable
    contract: Callable
    lie: Callable
    name: str = "calculus"
    g_degree: Callable = lambda X: X.degree
    w_degree: Callable = lambda w: w.degree

    def lie_cartan(self, X, w):
        return cartan_lie_derivative(lambda v: self.contract(X, v), self.d, self.g_degree(X))(w)


def _pairs(xs, ys):
    return product(enumerate(xs), enumerate(ys))


def check_gerstenhaber_axioms(wedge: Callable, bracket: Callable, samples: list,
                              degree: Callable = lambda x: x.degree,
                              triples: Iterable | None = None,
                              identities: Iterable[str] | None = None) -> Report:
    """Property checks of a Gerstenhaber algebra on sample elements.

    triples: optional iterable of index triples (defaults to all).
    """
    want = set(identities or ["wedge-assoc", "wedge-comm", "skew", "jacobi",
                              "left-leibniz", "right-leibniz"])
    rep = Report()
    n = len(samples)
    deg = [degree(x) for x in samples]
    if "wedge-comm" in want or "skew" in want:
        for i in range(n):
            for j in range(i, n):
                a, b = samples[i], samples[j]
                if "wedge-comm" in want:
                    _check(rep, "wedge-comm", (i, j), wedge(a, b), wedge(b, a) * sgn(deg[i] * deg[j]))
                if "skew" in want:
                    _check(rep, "skew", (i, j), bracket(a, b),
                           bracket(b, a) * (-sgn((deg[i] - 1) * (deg[j] - 1))))
    tri = triples if triples is not None else product(range(n), repeat=3)
    for i, j, k in tri:
        a, b, c = samples[i], samples[j], samples[k]
        p, q, r = deg[i], deg[j], deg[k]
        idx = (i, j, k)
        if "wedge-assoc" in want:
            _check(rep, "wedge-assoc", idx, wedge(wedge(a, b), c), wedge(a, wedge(b, c)))
        if "jacobi" in want:
            _check(rep, "jacobi", idx, bracket(a, bracket(b, c)),
                   bracket(bracket(a, b), c) + bracket(b, bracket(a, c)) * sgn((p - 1) * (q - 1)))
        if "left-leibniz" in want:
            _check(rep, "left-leibniz", idx, bracket(a, wedge(b, c)),
                   wedge(bracket(a, b), c) + wedge(b, bracket(a, c)) * sgn((p + 1) * q))
        if "right-leibniz" in want:
            _check(rep, "right-leibniz", idx, bracket(wedge(a, b), c),
                   wedge(a, bracket(b, c)) + wedge(bracket(a, c), b) * sgn(q * (r + 1)))
    return rep


def check_calculus_axioms(calc: Calculus, chains: list, forms: list,
                          pairs: Iterable | None = None,
                          identities: Iterable[str] | None = None) -> Report:
    """Super-commutator identities of a calculus structure on samples.

    pairs: optional iterable of (i, j) chain index pairs; every pair is tested
    against every form.
    """
    want = set(identities or ["iota-iota", "L-iota", "L-L", "L-d", "cartan", "iota-module"])
    rep = Report()
    io, L, d = calc.contract, calc.lie, calc.d
    hs = [calc.g_degree(X) for X in chains]
    if "cartan" in want or "L-d" in want:
        for i, X in enumerate(chains):
            h = hs[i]
            for a, w in enumerate(forms):
                if "cartan" in want:
                    rhs = io(X, d(w)) - d(io(X, w)) * sgn(h)
                    _check(rep, "cartan", (i, a), L(X, w), rhs)
                if "L-d" in want:
                    _check(rep, "L-d", (i, a), L(X, d(w)), d(L(X, w)) * sgn(h + 1))
    prs = pairs if pairs is not None else product(range(len(chains)), repeat=2)
    for i, j in prs:
        X, Y = chains[i], chains[j]
        h, k = hs[i], hs[j]
        XY = calc.bracket(X, Y) if want & {"L-iota", "L-L"} else None
        XwY = calc.wedge(X, Y) if "iota-module" in want else None
        for a, w in enumerate(forms):
            idx = (i, j, a)
            if "iota-iota" in want:
                _check(rep, "iota-iota", idx, io(X, io(Y, w)), io(Y, io(X, w)) * sgn(h * k))
            if "L-iota" in want:
                lhs = L(X, io(Y, w)) - io(Y, L(X, w)) * sgn((h + 1) * k)
                _check(rep, "L-iota", idx, lhs, io(XY, w))
            if "L-L" in want:
                lhs = L(X, L(Y, w)) - L(Y, L(X, w)) * sgn((h + 1) * (k + 1))
                _check(rep, "L-L", idx, lhs, L(XY, w))
            if "iota-module" in want:
                _check(rep, "iota-module", idx, io(XwY, w), io(X, io(Y, w)))
    return rep


def check_epsilon_rule(calc: Calculus, eps, chains: list, forms: list,
                       pairs: Iterable | None = None) -> Report:
    """L_{X^Y} = iota_X L_Y + (-1)^p(Y) L_X iota_Y - eps (-1)^p(Y) iota_{[X,Y]}."""
    rep = Report()
    io, L = calc.contract, calc.lie
    prs = pairs if pairs is not None else product(range(len(chains)), repeat=2)
    for i, j in prs:
        X, Y = chains[i], chains[j]
        s = sgn(calc.g_degree(Y))
        XwY, XY = calc.wedge(X, Y), calc.bracket(X, Y)
        for a, w in enumerate(forms):
            rhs = io(X, L(Y, w)) + L(X, io(Y, w)) * s
            if eps:
                rhs = rhs - io(XY, w) * (eps * s)
            _check(rep, f"eps-leibniz[{eps}]", (i, j, a), L(XwY, w), rhs)
    return rep


def adjoint_calculus(wedge: Callable, bracket: Callable, name: str = "adjoint") -> Calculus:
    """G acting on itself: iota_X = X ^ -, L_X = [X, -] (d is unused by the eps rule)."""
    return Calculus(wedge=wedge, bracket=bracket, d=lambda w: w * 0,
                    contract=wedge, lie=bracket, name=name)


# reduced calculus

class QuotientClass:
    """A class of Omega / dOmega represented by w, with a membership test for dOmega."""

    __slots__ = ("rep", "is_exact")

    def __init__(self, rep, is_exact: Callable):
        self.rep = rep
        self.is_exact = is_exact

    @property
    def degree(self):
        return self.rep.degree

    def __add__(self, other):
        o = other.rep if isinstance(other, QuotientClass) else other
        return QuotientClass(self.rep + o, self.is_exact)

    def __sub__(self, other):
        o = other.rep if isinstance(other, QuotientClass) else other
        return QuotientClass(self.rep - o, self.is_exact)

    def __neg__(self):
        return QuotientClass(-self.rep, self.is_exact)

    def __mul__(self, c):
        return QuotientClass(self.rep * c, self.is_exact)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.is_exact(self.rep)

    def __str__(self):
        return f"[{self.rep}]"


def reduced_calculus(calc: Calculus, delta: Callable, is_exact: Callable | None = None,
                     samples: list = (), name: str | None = None) -> Calculus:
    """Calculus induced on Omega / delta(Omega).

    delta must commute with d; this is verified on samples and NotChainMap is
    raised otherwise.  is_exact decides membership in delta(Omega); when
    omitted, only plain zero is exact (appropriate for delta = 0).
    """
    for n, w in enumerate(samples):
        if not (calc.d(delta(w)) - delta(calc.d(w))).is_zero():
            raise NotChainMap(f"[d, delta] != 0 on sample {n}")
    test = is_exact or (lambda w: w.is_zero())

    def wrap(w):
        return QuotientClass(w, test)

    def unwrap(c):
        return c.rep if isinstance(c, QuotientClass) else c

    return Calculus(
        wedge=calc.wedge, bracket=calc.bracket,
        d=lambda c: wrap(calc.d(unwrap(c))),
        contract=lambda X, c: wrap(calc.contract(X, unwrap(c))),
        lie=lambda X, c: wrap(calc.lie(X, unwrap(c))),
        name=name or f"reduced {calc.name}",
        g_degree=calc.g_degree,
        w_degree=lambda c: calc.w_degree(unwrap(c)),
    )


def commutes_with(calc: Calculus, delta: Callable, X, samples: list) -> bool:
    """Sample test of [iota_X, delta] = 0, the membership condition for the reduced G."""
    return all((calc.contract(X, delta(w)) - delta(calc.contract(X, w))).is_zero() for w in samples)


def check_morphism(phi: Callable, psi: Callable, calc: Calculus, calc2: Calculus,
                   chains2: list, forms: list, gerst: bool = True) -> Report:
    """Check (phi: G' -> G, psi: Omega -> Omega') is a morphism of calculi.

    Verifies phi respects wedge and bracket on pairs of chains2, psi d = d psi
    on forms, and iota_{X'} psi(w) = psi(iota_{phi(X')} w).
    """
    rep = Report()
    if gerst:
        for (i, X), (j, Y) in _pairs(chains2, chains2):
            _check(rep, "phi-wedge", (i, j), phi(calc2.wedge(X, Y)), calc.wedge(phi(X), phi(Y)))
            _check(rep, "phi-bracket", (i, j), phi(calc2.bracket(X, Y)), calc.bracket(phi(X), phi(Y)))
    for a, w in enumerate(forms):
        _check(rep, "psi-d", a, psi(calc.d(w)), calc2.d(psi(w)))
    for (i, X), (a, w) in _pairs(chains2, forms):
        _check(rep, "psi-iota", (i, a), calc2.contract(X, psi(w)), psi(calc.contract(phi(X), w)))
    return rep
