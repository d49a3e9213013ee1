"""Calculus of a finite-dimensional Lie algebra acting on a polynomial algebra.

Chains are A (x) Lambda g, realized as `Multivector` over the action
algebroid; cochains are skew maps Lambda^k g -> A stored on increasing index
tuples.  Basis indices are 0-based internally.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import combinations

from .diffalg import Poly, Var, partial
from .errors import DegreeMismatch, InvalidStructure
from .gerstenhaber import (Algebroid, Calculus, Multivector, cartan_lie_derivative,
                           sgn, sort_sign)
from .parsing import parse_expr, z_resolver


class FinLieAlgebra:
    """Lie algebra given by structure constants c[(i, j)] = {k: c_ij^k}."""

    def __init__(self, names: list[str], brackets: dict, check: bool = True):
        self.names = list(names)
        self.dim = len(names)
        self.c: dict = {}
        for (i, j), coeffs in brackets.items():
            coeffs = {k: Fraction(v) for k, v in coeffs.items() if v != 0}
            if i == j:
                if coeffs:
                    raise InvalidStructure(f"[e{i}, e{i}] must vanish")
                continue
            if (j, i) in self.c:
                neg = {k: -v for k, v in coeffs.items()}
                if self.c[(j, i)] != neg:
                    raise InvalidStructure(f"bracket table not antisymmetric at ({i}, {j})")
            self.c[(i, j)] = coeffs
            self.c[(j, i)] = {k: -v for k, v in coeffs.items()}
        if check:
            bad = self.jacobi_failure()
            if bad:
                raise InvalidStructure(f"Jacobi identity fails on basis triple {bad}")

    def bracket(self, i: int, j: int) -> dict:
        return self.c.get((i, j), {})

    def bracket_vec(self, x: dict, y: dict) -> dict:
        out: dict = {}
        for i, a in x.items():
            for j, b in y.items():
                for k, c in self.bracket(i, j).items():
                    out[k] = out.get(k, 0) + a * b * c
        return {k: v for k, v in out.items() if v != 0}

    def jacobi_failure(self):
        for i, j, k in combinations(range(self.dim), 3):
            e = lambda t: {t: 1}
            s: dict = {}
            for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
                for key, v in self.bracket_vec(e(a), self.bracket_vec(e(b), e(c))).items():
                    s[key] = s.get(key, 0) + v
            if any(v != 0 for v in s.values()):
                return (i, j, k)
        return None

    def __repr__(self):
        return f"FinLieAlgebra({self.names})"


def r2() -> FinLieAlgebra:
    """Two-dimensional non-abelian algebra, [e1, e2] = e2."""
    return FinLieAlgebra(["e1", "e2"], {(0, 1): {1: 1}})


def sl2() -> FinLieAlgebra:
    """Basis (e, h, f) with [h, e] = 2e, [h, f] = -2f, [e, f] = h."""
    return FinLieAlgebra(["e", "h", "f"], {(1, 0): {0: 2}, (1, 2): {2: -2}, (0, 2): {1: 1}})


def abelian(n: int) -> FinLieAlgebra:
    return FinLieAlgebra([f"e{i + 1}" for i in range(n)], {})


class GActionAlgebra:
    """A = Q[z_1..z_r] with g acting by derivations given on the generators.

    images[a][r] is rho(e_a)(z_{r+1}).
    """

    def __init__(self, g: FinLieAlgebra, zvars: list[str], images: list[list[Poly]] | None = None,
                 check: bool = True):
        self.g = g
        self.zvars = list(zvars)
        self.images = images if images is not None else [[Poly() for _ in zvars] for _ in range(g.dim)]
        if len(self.images) != g.dim:
            raise InvalidStructure("one list of images per basis element is required")
        if check:
            self._check()

    def act(self, a: int, f: Poly) -> Poly:
        out = Poly()
        for r, img in enumerate(self.images[a]):
            if not img.is_zero():
                out = out + partial(f, Var("z", r + 1)) * img
        return out

    def act_vec(self, x: dict, f: Poly) -> Poly:
        out = Poly()
        for a, c in x.items():
            out = out + self.act(a, f) * c
        return out

    def _check(self):
        for i, j in combinations(range(self.g.dim), 2):
            for r in range(len(self.zvars)):
                z = Poly.var(Var("z", r + 1))
                lhs = self.act(i, self.act(j, z)) - self.act(j, self.act(i, z))
                if lhs != self.act_vec(self.g.bracket(i, j), z):
                    raise InvalidStructure(f"action is not a representation on ({i}, {j})")

    def parse(self, text: str) -> Poly:
        return parse_expr(text, resolve=z_resolver(self.zvars))

    def monomials(self, max_deg: int) -> list[Poly]:
        out = [Poly.const(1)]
        layer = [Poly.const(1)]
        zs = [Poly.var(Var("z", r + 1)) for r in range(len(self.zvars))]
        for _ in range(max_deg):
            nxt = {}
            for m in layer:
                for z in zs:
                    p = m * z
                    nxt[p] = p
            layer = list(nxt.values())
            out.extend(layer)
        return out if zs else [Poly.const(1)]


def trivial_algebra(g: FinLieAlgebra) -> GActionAlgebra:
    return GActionAlgebra(g, [], [[] for _ in range(g.dim)])


def sl2_on_line(g: FinLieAlgebra | None = None) -> GActionAlgebra:
    """sl2 acting on Q[z]: e -> d/dz, h -> -2z d/dz, f -> -z^2 d/dz."""
    g = g or sl2()
    z = Poly.var(Var("z", 1))
    return GActionAlgebra(g, ["z"], [[Poly.const(1)], [z * -2], [-(z * z)]])


def r2_on_line(g: FinLieAlgebra | None = None) -> GActionAlgebra:
    """r2 acting on Q[z]: e1 -> -z d/dz, e2 -> d/dz."""
    g = g or r2()
    z = Poly.var(Var("z", 1))
    return GActionAlgebra(g, ["z"], [[-z], [Poly.const(1)]])


def algebroid(A: GActionAlgebra) -> Algebroid:
    cache = getattr(A, "_algebroid", None)
    if cache is None:
        g = A.g
        cache = Algebroid(lambda i, j: {k: Poly.const(v) for k, v in g.bracket(i, j).items()},
                          A.act, name=f"{g.names} on Q{A.zvars}", label=lambda i: g.names[i])
        A._algebroid = cache
    return cache


# chains

LieChain = Multivector


def chain(A: GActionAlgebra, labels, coef=1) -> Multivector:
    """coef (x) e_{labels[0]} ^ ... (0-based labels)."""
    return Multivector.from_wedge(algebroid(A), tuple(labels), coef)


def chain_wedge(X: Multivector, Y: Multivector) -> Multivector:
    return X.wedge(Y)


def chain_bracket(X: Multivector, Y: Multivector) -> Multivector:
    return X.bracket(Y)


# cochains

class LieCochain:
    """Skew k-linear map g^k -> A, stored on strictly increasing index tuples.

    Negative degrees denote the zero space.
    """

    __slots__ = ("A", "degree", "values")

    def __init__(self, A: GActionAlgebra, degree: int, values: dict | None = None):
        self.A = A
        self.degree = degree
        vals = {}
        if degree >= 0:
            for k, v in (values or {}).items():
                v = Poly.coerce(v)
                if v.is_zero():
                    continue
                s, key = sort_sign(k)
                if len(key) != degree:
                    raise DegreeMismatch(f"key {k} does not have length {degree}")
                if s:
                    vals[key] = vals.get(key, Poly()) + v * s
        self.values = {k: v for k, v in vals.items() if not v.is_zero()}

    @classmethod
    def basis(cls, A, labels, coef=1) -> "LieCochain":
        return cls(A, len(labels), {tuple(labels): coef})

    def __call__(self, labels) -> Poly:
        s, key = sort_sign(labels)
        if s == 0:
            return Poly()
        v = self.values.get(key)
        return v * s if v is not None else Poly()

    def _combine(self, other, c):
        if not isinstance(other, LieCochain):
            if other == 0:
                return self
            return NotImplemented
        if other.degree != self.degree:
            if other.is_zero():
                return self
            if self.is_zero():
                return other * c
            raise DegreeMismatch(f"cannot add degrees {self.degree} and {other.degree}")
        t = dict(self.values)
        for k, v in other.values.items():
            t[k] = t.get(k, Poly()) + v * c
        return LieCochain(self.A, self.degree, t)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, c):
        c = Poly.coerce(c)
        return LieCochain(self.A, self.degree, {k: v * c for k, v in self.values.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.values

    def __eq__(self, other):
        return isinstance(other, LieCochain) and (self - other).is_zero()

    def __str__(self):
        if not self.values:
            return "0"
        names = self.A.g.names
        parts = []
        for k in sorted(self.values):
            w = "∧".join(names[i] + "*" for i in k) or "1"
            parts.append(f"({self.values[k]}){w}")
        return " + ".join(parts)

    __repr__ = __str__


def cochain_d(w: LieCochain) -> LieCochain:
    """Chevalley-Eilenberg differential with coefficients in A."""
    A, g, k = w.A, w.A.g, w.degree
    if k < 0:
        return LieCochain(A, k + 1)
    out = {}
    for x in combinations(range(g.dim), k + 1):
        val = Poly()
        for i in range(k + 1):
            rest = x[:i] + x[i + 1:]
            v = w(rest)
            if not v.is_zero():
                val = val + A.act(x[i], v) * sgn(i)
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                rest = x[:i] + x[i + 1:j] + x[j + 1:]
                s = sgn(i + j)
                for c, cc in g.bracket(x[i], x[j]).items():
                    v = w((c,) + rest)
                    if not v.is_zero():
                        val = val + v * (cc * s)
        if not val.is_zero():
            out[x] = val
    return LieCochain(A, k + 1, out)


def _chain_degree(X: Multivector) -> int:
    return X.degree


def contract(X: Multivector, w: LieCochain, strict: bool = True) -> LieCochain:
    """(iota_{f e_X} w)(Y) = (-1)^(h(h-1)/2) f w(X ^ Y)."""
    h, k = _chain_degree(X), w.degree
    if h > k:
        if strict and k > 0:
            raise DegreeMismatch(f"cannot contract a degree-{h} chain into a degree-{k} cochain")
        return LieCochain(w.A, k - h)
    s0 = sgn(h * (h - 1) // 2)
    out: dict = {}
    for x, f in X.terms.items():
        for key, v in w.values.items():
            if not set(x) <= set(key):
                continue
            y = tuple(i for i in key if i not in x)
            s, _ = sort_sign(x + y)
            out[y] = out.get(y, Poly()) + f * v * (s * s0)
    return LieCochain(w.A, k - h, out)


def lie_derive(X: Multivector, w: LieCochain, strict: bool = True) -> LieCochain:
    """Lie derivative by Cartan's formula L_X = iota_X d - (-1)^h d iota_X."""
    h, k = _chain_degree(X), w.degree
    if strict and h > k + 1 and k > 0:
        raise DegreeMismatch(f"Lie derivative of degree {h} on a degree-{k} cochain")
    return cartan_lie_derivative(lambda v: contract(X, v, strict=False), cochain_d, h)(w)


def lie_derive_vector(X: Multivector, w: LieCochain) -> LieCochain:
    """Explicit formula for a degree-1 chain sum f_a e_a:
    (L_X w)(Y_1..Y_k) = X(w(Y)) - sum_i w(Y_1 .. [X, Y_i] .. Y_k), with the
    algebroid bracket [f e_a, e_b] = f [e_a, e_b] - e_b(f) e_a.
    """
    A, g, k = w.A, w.A.g, w.degree
    out = {}
    for y in combinations(range(g.dim), k):
        val = Poly()
        for (a,), f in X.terms.items():
            val = val + f * A.act(a, w(y))
            for i in range(k):
                head, tail = y[:i], y[i + 1:]
                for c, cc in g.bracket(a, y[i]).items():
                    val = val - f * w(head + (c,) + tail) * cc
                fa = A.act(y[i], f)
                if not fa.is_zero():
                    val = val + fa * w(head + (a,) + tail)
        out[y] = val
    return LieCochain(A, k, out)


def build_lie_calculus(A: GActionAlgebra) -> Calculus:
    return Calculus(
        wedge=chain_wedge, bracket=chain_bracket, d=cochain_d,
        contract=lambda X, w: contract(X, w, strict=False),
        lie=lambda X, w: lie_derive(X, w, strict=False),
        name=f"lie {A.g.names} on Q{A.zvars}",
    )


def basis_chains(A: GActionAlgebra, max_degree: int, a_degree: int = 0) -> list[Multivector]:
    out = []
    for h in range(max_degree + 1):
        for x in combinations(range(A.g.dim), h):
            for m in A.monomials(a_degree):
                out.append(chain(A, x, m))
    return out


def basis_cochains(A: GActionAlgebra, max_degree: int, a_degree: int = 0) -> list[LieCochain]:
    out = []
    for k in range(max_degree + 1):
        for x in combinations(range(A.g.dim), k):
            for m in A.monomials(a_degree):
                out.append(LieCochain.basis(A, x, m))
    return out


# JSON input

def from_json(data) -> GActionAlgebra:
    """Read {dim, basis, brackets: [{i, j, coeffs: [{k, c}]}], action: [{gen, images}]}.

    Indices i, j, k, gen are 1-based.  The action variables are named in an
    optional "vars" list (default ["z"]).
    """
    if isinstance(data, str):
        data = json.loads(data)
    names = data.get("basis") or [f"e{i + 1}" for i in range(data["dim"])]
    if len(names) != data.get("dim", len(names)):
        raise InvalidStructure("dim does not match basis")
    br = {}
    for b in data.get("brackets", []):
        br[(b["i"] - 1, b["j"] - 1)] = {t["k"] - 1: Fraction(str(t["c"])) for t in b.get("coeffs", [])}
    g = FinLieAlgebra(names, br)
    acts = data.get("action", [])
    if not acts:
        return trivial_algebra(g)
    zvars = data.get("vars", ["z"])
    res = z_resolver(zvars)
    images = [[Poly() for _ in zvars] for _ in range(g.dim)]
    for a in acts:
        images[a["gen"] - 1] = [parse_expr(s, resolve=res) for s in a["images"]]
    return GActionAlgebra(g, zvars, images)
