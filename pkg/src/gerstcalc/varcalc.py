"""Variational calculus over an algebra of differential polynomials.

Forms are elements of the de Rham complex over V, written on strictly
increasing lists of jet variables u_i^(m); the stored coefficient at a sorted
list is the value of the skew coefficient tensor there.  Polyvector fields
are stored the same way, on sorted lists of partials d/du_i^(m); a field may
carry a trust order, in which case only coefficients on lists of total order
<= trust are known.

Local operators of degree k are skew tensors f^{m}_{i}; they are kept as
conformal cochains over the zero-bracket algebra with free action, whose
value at a generator tuple is sum_m lambda^m f^m.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, factorial, prod

from .conformal import free_action, zero_lca
from .conformal_calculus import (ChainGauge, ConformalCochain, TruncatedChain, _pair, _tmp,
                                 chain_expand,
                                 lv, sorting_perms, vector_chain)
from .diffalg import (Poly, Var, format_poly, format_var, is_total_derivative, partial,
                      total_derivative, u_vars)
from .errors import (DegreeMismatch, InsufficientOrder, InvalidStructure, SkewAdjointViolation)
from .gerstenhaber import (Algebroid, Calculus, Multivector, QuotientClass,
                           cartan_lie_derivative, schouten_bracket, sgn, sort_sign)


@lru_cache(maxsize=None)
def variational_setting(ngens: int):
    """(R, spec): zero-bracket algebra on ngens generators acting freely on V."""
    R = zero_lca(ngens)
    return R, free_action(R)


def _label_order(labels) -> int:
    return sum(v.order for v in labels)


def _check_labels(labels, ngens):
    for v in labels:
        if not isinstance(v, Var) or v.kind != "u":
            raise InvalidStructure(f"{v!r} is not a jet variable")
        if not 1 <= v.index <= ngens:
            raise InvalidStructure(f"{format_var(v)} is outside {ngens} generators")


def _term_str(coef: Poly, body: str) -> str:
    if not body:
        return format_poly(coef)
    if coef == Poly.const(1):
        return body
    if coef == Poly.const(-1):
        return "-" + body
    s = format_poly(coef)
    if len(coef.terms) > 1:
        s = f"({s})"
    return f"{s}*{body}"


def _join(parts: list[str]) -> str:
    if not parts:
        return "0"
    out = parts[0]
    for p in parts[1:]:
        out += " - " + p[1:] if p.startswith("-") else " + " + p
    return out


# forms

class DeRhamForm:
    """k-form sum f du_{v1} ^ ... ^ du_{vk} over increasing lists of jet variables."""

    __slots__ = ("ngens", "degree", "terms")

    def __init__(self, ngens: int, degree: int, terms: dict | None = None):
        self.ngens, self.degree = ngens, degree
        store: dict = {}
        if degree >= 0:
            for labels, f in (terms or {}).items():
                labels = tuple(labels)
                if len(labels) != degree:
                    raise DegreeMismatch(f"{len(labels)} differentials in a {degree}-form")
                _check_labels(labels, ngens)
                s, key = sort_sign(labels)
                if s:
                    store[key] = store.get(key, Poly()) + Poly.coerce(f) * s
        self.terms = {k: v for k, v in store.items() if not v.is_zero()}

    @classmethod
    def function(cls, ngens: int, f) -> "DeRhamForm":
        return cls(ngens, 0, {(): Poly.coerce(f)})

    @classmethod
    def du(cls, ngens: int, i: int, n: int = 0) -> "DeRhamForm":
        return cls(ngens, 1, {(Var("u", i, n),): Poly.const(1)})

    def like(self, degree: int, terms: dict | None = None) -> "DeRhamForm":
        return DeRhamForm(self.ngens, degree, terms)

    def _combine(self, other, c):
        if isinstance(other, int) and other == 0:
            return self
        if not isinstance(other, DeRhamForm):
            return NotImplemented
        if other.degree != self.degree:
            if other.is_zero():
                return self
            if self.is_zero():
                return other * c
            raise DegreeMismatch(f"cannot add forms of degrees {self.degree} and {other.degree}")
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, Poly()) + v * c
        return self.like(self.degree, t)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, c):
        c = Poly.coerce(c)
        return self.like(self.degree, {k: v * c for k, v in self.terms.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, DeRhamForm) and (self - other).is_zero()

    def wedge(self, other: "DeRhamForm") -> "DeRhamForm":
        t: dict = {}
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                s, key = sort_sign(k1 + k2)
                if s:
                    t[key] = t.get(key, Poly()) + v1 * v2 * s
        return self.like(self.degree + other.degree, t)

    def max_order(self) -> int:
        """Largest jet order among coefficients and differentials."""
        out = -1
        for k, v in self.terms.items():
            out = max(out, v.max_order(), *(x.order for x in k)) if k else max(out, v.max_order())
        return out

    def __str__(self):
        parts = []
        for k in sorted(self.terms, key=lambda t: (_label_order(t), t)):
            body = "∧".join("d" + format_var(v) for v in k)
            parts.append(_term_str(self.terms[k], body))
        return _join(parts)

    __repr__ = __str__


def deRham_d(w: DeRhamForm) -> DeRhamForm:
    t: dict = {}
    for k, f in w.terms.items():
        for v in u_vars(f):
            s, key = sort_sign((v,) + k)
            if s:
                t[key] = t.get(key, Poly()) + partial(f, v) * s
    return w.like(w.degree + 1, t)


def form_del(w: DeRhamForm) -> DeRhamForm:
    """Action of d/dx: total derivative on coefficients, du^(n) -> du^(n+1)."""
    t: dict = {}
    for k, f in w.terms.items():
        t[k] = t.get(k, Poly()) + total_derivative(f)
        for a, v in enumerate(k):
            s, key = sort_sign(k[:a] + (v.shifted(),) + k[a + 1:])
            if s:
                t[key] = t.get(key, Poly()) + f * s
    return w.like(w.degree, t)


def _iota_label(v: Var, w: DeRhamForm) -> DeRhamForm:
    """Contraction with d/dv: the odd derivation with du_v -> 1."""
    t: dict = {}
    for k, f in w.terms.items():
        for a, x in enumerate(k):
            if x == v:
                key = k[:a] + k[a + 1:]
                t[key] = t.get(key, Poly()) + f * sgn(a)
    return w.like(w.degree - 1, t)


# polyvector fields

JET = Algebroid(lambda a, b: {}, lambda v, f: partial(f, v), "jet")


def _min_trust(*ts):
    known = [t for t in ts if t is not None]
    return min(known) if known else None


class PolyVectorField:
    """sum P d/du_{v1} ^ ... ^ d/du_{vk}, optionally known only up to total order `trust`."""

    __slots__ = ("ngens", "degree", "terms", "trust")

    def __init__(self, ngens: int, terms: dict | None = None, trust: int | None = None,
                 degree: int | None = None):
        self.ngens, self.trust = ngens, trust
        store: dict = {}
        for labels, P in (terms or {}).items():
            labels = tuple(labels)
            _check_labels(labels, ngens)
            if trust is not None and _label_order(labels) > trust:
                continue
            s, key = sort_sign(labels)
            if s:
                store[key] = store.get(key, Poly()) + Poly.coerce(P) * s
        self.terms = {k: v for k, v in store.items() if not v.is_zero()}
        degs = {len(k) for k in self.terms}
        if len(degs) > 1:
            raise DegreeMismatch("inhomogeneous polyvector field")
        if degree is None:
            degree = degs.pop() if degs else 0
        elif degs and degs != {degree}:
            raise DegreeMismatch(f"terms do not have degree {degree}")
        self.degree = degree

    @classmethod
    def partial(cls, ngens: int, *labels, coef=1) -> "PolyVectorField":
        """coef * d/du_{labels[0]} ^ ...; labels are Vars or (i, n) pairs."""
        vs = tuple(v if isinstance(v, Var) else Var("u", v[0], v[1]) for v in labels)
        return cls(ngens, {vs: Poly.coerce(coef)}, degree=len(vs))

    def like(self, terms, trust, degree) -> "PolyVectorField":
        return PolyVectorField(self.ngens, terms, trust, degree)

    def multivector(self) -> Multivector:
        return Multivector(JET, self.terms)

    def _combine(self, other, c):
        if isinstance(other, int) and other == 0:
            return self
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        trust = _min_trust(self.trust, other.trust)
        if other.degree != self.degree:
            if other.is_zero():
                return self.truncate(trust)
            if self.is_zero():
                return (other * c).truncate(trust)
            raise DegreeMismatch(f"cannot add fields of degrees {self.degree} and {other.degree}")
        t = dict(self.terms)
        for k, v in other.terms.items():
            t[k] = t.get(k, Poly()) + v * c
        return self.like(t, trust, self.degree)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, c):
        c = Poly.coerce(c)
        return self.like({k: v * c for k, v in self.terms.items()}, self.trust, self.degree)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, PolyVectorField) and (self - other).is_zero()

    def truncate(self, N: int | None) -> "PolyVectorField":
        if N is None:
            return self
        if self.trust is not None and N > self.trust:
            raise InsufficientOrder(f"cannot raise trust order {self.trust} to {N}", N)
        return self.like(self.terms, N, self.degree)

    def max_order(self, upto: int | None = None) -> int:
        """Largest jet order in coefficients on lists of total order <= upto."""
        return max((v.max_order() for k, v in self.terms.items()
                    if upto is None or _label_order(k) <= upto), default=-1)

    def wedge(self, other: "PolyVectorField") -> "PolyVectorField":
        mv = self.multivector().wedge(other.multivector())
        return self.like(mv.terms, _min_trust(self.trust, other.trust), self.degree + other.degree)

    def bracket(self, other: "PolyVectorField") -> "PolyVectorField":
        return polyvector_schouten(self, other)

    def act(self, f: Poly) -> Poly:
        """X(f) for a vector field X."""
        if self.degree != 1:
            raise DegreeMismatch("only vector fields act on functions")
        if self.trust is not None and f.max_order() > self.trust:
            raise InsufficientOrder(f"field known to order {self.trust}, function has order "
                                    f"{f.max_order()}", f.max_order())
        out = Poly()
        for (v,), P in self.terms.items():
            out = out + P * partial(f, v)
        return out

    def groups(self) -> dict:
        """{generator tuple (0-based, sorted): {orders: coefficient}}."""
        out: dict = {}
        for k, P in self.terms.items():
            s = tuple(v.index - 1 for v in k)
            out.setdefault(s, {})[tuple(v.order for v in k)] = P
        return out

    def __str__(self):
        parts = []
        for k in sorted(self.terms, key=lambda t: (_label_order(t), t)):
            body = "∧".join(f"∂/∂{format_var(v)}" for v in k)
            parts.append(_term_str(self.terms[k], body))
        s = _join(parts)
        return s if self.trust is None else f"{s} + O({self.trust + 1})"

    __repr__ = __str__


def _schouten_trust(X: PolyVectorField, Y: PolyVectorField):
    """Largest output order whose coefficients only use known input coefficients."""
    if X.trust is None and Y.trust is None:
        return None
    for n in range(_min_trust(X.trust, Y.trust), -2, -1):
        ok_x = X.trust is None or n + max(Y.max_order(n), 0) <= X.trust
        ok_y = Y.trust is None or n + max(X.max_order(n), 0) <= Y.trust
        if ok_x and ok_y:
            return n
    return -1


def polyvector_schouten(X: PolyVectorField, Y: PolyVectorField) -> PolyVectorField:
    """Schouten bracket of polyvector fields (partials commute)."""
    trust = _schouten_trust(X, Y)
    mv = schouten_bracket(X.multivector(), Y.multivector())
    return PolyVectorField(X.ngens, mv.terms, trust, X.degree + Y.degree - 1)


def polyvector_del(X: PolyVectorField) -> PolyVectorField:
    """[d/dx, X]: d of the coefficients minus the shift d/du^(n) -> d/du^(n-1)."""
    t: dict = {}
    for k, P in X.terms.items():
        t[k] = t.get(k, Poly()) + total_derivative(P)
        for a, v in enumerate(k):
            if v.order == 0:
                continue
            s, key = sort_sign(k[:a] + (Var("u", v.index, v.order - 1),) + k[a + 1:])
            if s:
                t[key] = t.get(key, Poly()) - P * s
    trust = None if X.trust is None else X.trust - 1
    return PolyVectorField(X.ngens, t, trust, X.degree)


def is_evolutionary(X: PolyVectorField) -> bool:
    """True iff X commutes with d/dx (within the trust order of X).

    Apart from constant fields on the u_i themselves (e.g. d/du), a field with
    finitely many terms is not evolutionary; truncations of infinite fields
    such as Phi-images pass through their trust order.
    """
    return polyvector_del(X).is_zero()


class EvVectorField:
    """Evolutionary vector field sum_{i,n} (d^n P_i) d/du_i^(n)."""

    def __init__(self, chars):
        self.chars = [Poly.coerce(p) for p in chars]
        self.ngens = len(self.chars)

    degree = 1

    def act(self, f: Poly) -> Poly:
        out = Poly()
        for v in u_vars(f):
            out = out + total_derivative(self.chars[v.index - 1], v.order) * partial(f, v)
        return out

    def as_polyvector(self, N: int) -> PolyVectorField:
        t = {}
        for i, P in enumerate(self.chars):
            dp = P
            for n in range(N + 1):
                t[(Var("u", i + 1, n),)] = dp
                dp = total_derivative(dp)
        return PolyVectorField(self.ngens, t, N, 1)

    def to_chain(self, N: int) -> TruncatedChain:
        R, spec = variational_setting(self.ngens)
        return vector_chain(R, spec, self.chars, N)

    def bracket(self, other: "EvVectorField") -> "EvVectorField":
        return EvVectorField([self.act(Q) - other.act(P) for P, Q in zip(self.chars, other.chars)])

    def __eq__(self, other):
        return isinstance(other, EvVectorField) and self.chars == other.chars

    def __str__(self):
        return "X[" + ", ".join(format_poly(p) for p in self.chars) + "]"

    __repr__ = __str__


def _needed_order(w: DeRhamForm) -> int:
    return max((_label_order(k) for k in w.terms), default=0)


def as_polyvector(X, N: int) -> PolyVectorField:
    """Coerce an EvVectorField, a list of them (their wedge) or a chain to a field of trust >= N."""
    if isinstance(X, PolyVectorField):
        return X
    if isinstance(X, EvVectorField):
        return X.as_polyvector(N)
    if isinstance(X, TruncatedChain):
        if X.trust < N:
            raise InsufficientOrder(f"chain is known to order {X.trust}, {N} needed", N)
        return Phi(X)
    if isinstance(X, (list, tuple)):
        if not X:
            raise InvalidStructure("empty wedge")
        out = as_polyvector(X[0], N)
        for Y in X[1:]:
            out = out.wedge(as_polyvector(Y, N))
        return out
    raise TypeError(f"cannot read {type(X).__name__} as a polyvector field")


def form_contract(X, w: DeRhamForm, strict: bool = True) -> DeRhamForm:
    """iota_X w; for X = P d_{v1}^...^d_{vh} this is P iota_{v1} ... iota_{vh}."""
    X = as_polyvector(X, _needed_order(w))
    h, k = X.degree, w.degree
    if h > k:
        if strict and k > 0:
            raise DegreeMismatch(f"cannot contract a degree-{h} field into a {k}-form")
        return w.like(k - h)
    if X.trust is not None and h:
        for lab in w.terms:
            top = sum(sorted((v.order for v in lab), reverse=True)[:h])
            if top > X.trust:
                raise InsufficientOrder(f"contraction needs field coefficients of order {top}, "
                                        f"trust order is {X.trust}", top)
    out = w.like(k - h)
    for labs, P in X.terms.items():
        part = w
        for v in reversed(labs):
            part = _iota_label(v, part)
        out = out + part * P
    return out


def form_lie_derive(X, w: DeRhamForm, strict: bool = True) -> DeRhamForm:
    """L_X = iota_X d - (-1)^h d iota_X."""
    X = as_polyvector(X, _needed_order(w) + 1 + max(w.max_order(), 0))
    h, k = X.degree, w.degree
    if strict and h > k + 1 and k > 0:
        raise DegreeMismatch(f"Lie derivative of degree {h} on a {k}-form")
    return cartan_lie_derivative(lambda v: form_contract(X, v, strict=False), deRham_d, h)(w)


def build_deRham_calculus() -> Calculus:
    return Calculus(
        wedge=lambda X, Y: X.wedge(Y), bracket=polyvector_schouten, d=deRham_d,
        contract=lambda X, w: form_contract(X, w, strict=False),
        lie=lambda X, w: form_lie_derive(X, w, strict=False),
        name="de Rham",
    )


# Phi and Psi

def Phi(a: TruncatedChain, N: int | None = None) -> PolyVectorField:
    """Polyvector field of a chain over the zero-bracket algebra: P^n = n! c_n."""
    R, spec = a.R, a.spec
    if not R.is_zero() or spec.kind != "free":
        raise InvalidStructure("Phi needs a zero-bracket algebra acting freely")
    N = a.trust if N is None else N
    if N > a.trust:
        raise InsufficientOrder(f"chain is known to order {a.trust}, {N} requested", N)
    t: dict = {}
    for s, ms, ser in a.components():
        for n, c in ser.items():
            if sum(n) > N:
                continue
            labels = tuple(Var("u", g + 1, m) for g, m in zip(s, n))
            sg, key = sort_sign(labels)
            if sg:
                t[key] = t.get(key, Poly()) + c * (sg * ms * prod(factorial(m) for m in n))
    return PolyVectorField(spec.ngens, t, N, a.degree)


def Psi(w: DeRhamForm) -> ConformalCochain:
    """Conformal cochain with value sum_m lambda^m <f>^m at each generator tuple."""
    R, spec = variational_setting(w.ngens)
    vals: dict = {}
    if w.degree < 0:
        return ConformalCochain(R, spec, w.degree)
    for labs, f in w.terms.items():
        gens = tuple(v.index - 1 for v in labs)
        for p, s in sorting_perms(gens):
            key = tuple(gens[i] for i in p)
            mono = Poly.const(s)
            for a, i in enumerate(p):
                if labs[i].order:
                    mono = mono * Poly.var(lv(a + 1)) ** labs[i].order
            vals[key] = vals.get(key, Poly()) + f * mono
    return ConformalCochain(R, spec, w.degree, vals)


# local operators

def _lambda_split(v: Poly, k: int) -> dict:
    """{exponents of lambda_1..lambda_k: coefficient}."""
    out: dict = {}
    lams = {lv(a + 1): a for a in range(k)}
    for m, c in v.terms.items():
        e = [0] * k
        rest = []
        for x, p in m:
            if x in lams:
                e[lams[x]] = p
            else:
                rest.append((x, p))
        key = tuple(e)
        out[key] = out.get(key, Poly()) + Poly({tuple(rest): c})
    return out


class LocalOperator:
    """Skew local k-operator S(X) = sum int f^{m}_{i} P^{m}_{i}."""

    __slots__ = ("ngens", "degree", "cochain")

    def __init__(self, ngens: int, degree: int, cochain: ConformalCochain | None = None):
        self.ngens, self.degree = ngens, degree
        if cochain is None:
            R, spec = variational_setting(ngens)
            cochain = ConformalCochain(R, spec, degree)
        self.cochain = cochain

    @classmethod
    def from_cochain(cls, c: ConformalCochain) -> "LocalOperator":
        return cls(c.spec.ngens, c.degree, c)

    @classmethod
    def from_form(cls, w: DeRhamForm) -> "LocalOperator":
        return cls(w.ngens, w.degree, Psi(w))

    @classmethod
    def from_tensor(cls, ngens: int, degree: int, tensor: dict) -> "LocalOperator":
        """tensor: {ordered jet-variable tuple: f}, skewsymmetrized."""
        return cls.from_form(DeRhamForm(ngens, degree, tensor))

    def to_form(self) -> DeRhamForm:
        """A form w with Psi(w) equal to this operator."""
        k = self.degree
        t: dict = {}
        if k < 0:
            return DeRhamForm(self.ngens, k)
        for s, v in self.cochain.values.items():
            st = len(sorting_perms(s))
            for m, f in _lambda_split(v, k).items():
                labels = tuple(Var("u", g + 1, n) for g, n in zip(s, m))
                sg, key = sort_sign(labels)
                if sg:
                    t[key] = t.get(key, Poly()) + f * Fraction(sg, st)
        return DeRhamForm(self.ngens, k, t)

    def tensor(self) -> dict:
        return self.to_form().terms

    def order(self) -> int:
        return self.cochain.lambda_degree()

    def _wrap(self, c):
        return LocalOperator(self.ngens, c.degree, c)

    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        return self._wrap(self.cochain + other.cochain)

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.cochain - other.cochain)

    def __neg__(self):
        return self._wrap(-self.cochain)

    def __mul__(self, c):
        return self._wrap(self.cochain * c)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return self.cochain.is_zero()

    def __eq__(self, other):
        return isinstance(other, LocalOperator) and (self - other).is_zero()

    def __str__(self):
        return str(self.to_form()) if self.degree else f"∫{self.cochain.values.get((), Poly())}"

    __repr__ = __str__


def integral_class(f: Poly) -> QuotientClass:
    """Class of f in V / dV."""
    return QuotientClass(Poly.coerce(f), is_total_derivative)


def eval_local(S: LocalOperator, X) -> QuotientClass:
    """S(X) = sum over sorted jet lists of f P, as a class in V/dV."""
    X = as_polyvector(X, S.order())
    if X.degree != S.degree:
        if X.is_zero() or S.is_zero():
            return integral_class(Poly())
        raise DegreeMismatch(f"degree-{S.degree} operator on a degree-{X.degree} field")
    w = S.to_form()
    out = Poly()
    for labs, f in w.terms.items():
        if X.trust is not None and _label_order(labs) > X.trust:
            raise InsufficientOrder(f"operator needs field coefficients of order "
                                    f"{_label_order(labs)}, trust order is {X.trust}",
                                    _label_order(labs))
        P = X.terms.get(labs)
        if P is not None:
            out = out + f * P
    return integral_class(out)


def local_op_d(S: LocalOperator) -> LocalOperator:
    """(dS)^{m}_{i} = sum_a (-1)^(a+1) d f^{(omit a)} / du_{i_a}^{(m_a)}."""
    return LocalOperator.from_form(deRham_d(S.to_form()))


def _field_for(X, S: LocalOperator, extra: int = 0) -> PolyVectorField:
    return as_polyvector(X, S.order() + extra)


def _trust(X: PolyVectorField) -> int:
    return 10 ** 9 if X.trust is None else X.trust


def local_op_contract(X, S: LocalOperator, strict: bool = True) -> LocalOperator:
    """(iota_X S)^{rest} = (-1)^(h(h-1)/2) sum f^{(first h), rest} P^{first h}."""
    X = _field_for(X, S)
    h, k = X.degree, S.degree
    R, spec = variational_setting(S.ngens)
    if h > k:
        if strict and k > 0:
            raise DegreeMismatch(f"cannot contract a degree-{h} field into a degree-{k} operator")
        return LocalOperator(S.ngens, k - h)
    c = S.cochain
    s0 = sgn(h * (h - 1) // 2)
    tmps = [_tmp(a + 1) for a in range(h)]
    lams = [Poly.var(t) for t in tmps] + [Poly.var(lv(a + 1)) for a in range(k - h)]
    groups = X.groups()
    out = {}
    for r in combinations_with_replacement(range(S.ngens), k - h):
        val = Poly()
        for s, ser in groups.items():
            v = c.value_at(s + r, lams)
            val = val + _pair(ser, v, tmps, _trust(X), n_weight=False)
        if not val.is_zero():
            out[r] = val * s0
    return LocalOperator(S.ngens, k - h, ConformalCochain(R, spec, k - h, out))


def local_op_lie_derive(X, S: LocalOperator) -> LocalOperator:
    """Closed formula for L_X S: X differentiates the coefficients of S, and the
    remaining arguments differentiate the coefficients of X."""
    X = _field_for(X, S, 1 + max(S.cochain.max_order(), 0))
    h, k = X.degree, S.degree
    R, spec = variational_setting(S.ngens)
    if h > k + 1:
        return LocalOperator(S.ngens, k - h + 1)
    c = S.cochain
    s0 = sgn(h * (h - 1) // 2)
    tmps = [_tmp(a + 1) for a in range(h)]
    lams = [Poly.var(t) for t in tmps] + [Poly.var(lv(a + 1)) for a in range(k + 1 - h)]
    groups = X.groups()
    trust = _trust(X)
    out = {}
    for r in combinations_with_replacement(range(S.ngens), k + 1 - h):
        val = Poly()
        for s, ser in groups.items():
            x = s + r
            for i in range(k + 1):
                v = c.value_at(x[:i] + x[i + 1:], lams[:i] + lams[i + 1:])
                if v.is_zero():
                    continue
                if i < h:
                    a = spec.act(x[i], v, lams[i])
                    val = val + _pair(ser, a, tmps, trust, n_weight=False) * sgn(i)
                else:
                    acted = {n: spec.act(x[i], P, lams[i]) for n, P in ser.items()}
                    val = val + _pair(acted, v, tmps, trust, n_weight=False) * sgn(i + 1)
        if not val.is_zero():
            out[r] = val * s0
    return LocalOperator(S.ngens, k + 1 - h, ConformalCochain(R, spec, k + 1 - h, out))


def build_variational_calculus() -> Calculus:
    """Polyvector fields acting on local operators."""
    return Calculus(
        wedge=lambda X, Y: X.wedge(Y), bracket=polyvector_schouten, d=local_op_d,
        contract=lambda X, S: local_op_contract(X, S, strict=False),
        lie=local_op_lie_derive,
        name="variational",
    )


# operators and Poisson structures

class DiffOperatorMatrix:
    """l x l matrix of differential operators; entries {(i, j): {n: h_ij;n}}, 0-based."""

    def __init__(self, l: int, entries: dict | None = None):
        self.l = l
        self.entries: dict = {}
        for (i, j), ops in (entries or {}).items():
            if not (0 <= i < l and 0 <= j < l):
                raise InvalidStructure(f"entry ({i + 1}, {j + 1}) outside a {l}x{l} matrix")
            clean = {}
            for n, h in ops.items():
                if n < 0:
                    raise InvalidStructure("negative power of d")
                h = Poly.coerce(h)
                for v in u_vars(h):
                    if v.index > l:
                        raise InvalidStructure(f"{format_var(v)} is outside {l} generators")
                if not h.is_zero():
                    clean[n] = clean.get(n, Poly()) + h
            clean = {n: h for n, h in clean.items() if not h.is_zero()}
            if clean:
                self.entries[(i, j)] = clean

    def entry(self, i: int, j: int) -> dict:
        return self.entries.get((i, j), {})

    @property
    def d_order(self) -> int:
        return max((n for e in self.entries.values() for n in e), default=0)

    @property
    def coef_order(self) -> int:
        return max((h.max_order() for e in self.entries.values() for h in e.values()), default=-1)

    def adjoint(self) -> "DiffOperatorMatrix":
        """(H*)_{ij} = sum_n (-d)^n o h_{ji;n}."""
        out: dict = {}
        for (i, j), ops in self.entries.items():
            tgt = out.setdefault((j, i), {})
            for n, h in ops.items():
                for k in range(n + 1):
                    c = total_derivative(h, n - k) * (sgn(n) * comb(n, k))
                    tgt[k] = tgt.get(k, Poly()) + c
        return DiffOperatorMatrix(self.l, out)

    def __neg__(self):
        return DiffOperatorMatrix(self.l, {k: {n: -h for n, h in e.items()}
                                           for k, e in self.entries.items()})

    def __add__(self, other):
        out = {k: dict(e) for k, e in self.entries.items()}
        for k, e in other.entries.items():
            tgt = out.setdefault(k, {})
            for n, h in e.items():
                tgt[n] = tgt.get(n, Poly()) + h
        return DiffOperatorMatrix(self.l, out)

    def __eq__(self, other):
        return isinstance(other, DiffOperatorMatrix) and not (self + (-other)).entries

    def skew_violation(self):
        """First entry (i, j) (0-based) where H* != -H, or None."""
        diff = self.adjoint() + self
        return min(diff.entries) if diff.entries else None

    def is_skew_adjoint(self) -> bool:
        return self.skew_violation() is None

    def apply(self, F: list) -> list:
        out = []
        for i in range(self.l):
            v = Poly()
            for j in range(self.l):
                for n, h in self.entry(i, j).items():
                    v = v + h * total_derivative(Poly.coerce(F[j]), n)
            out.append(v)
        return out

    def entry_str(self, i: int, j: int) -> str:
        parts = []
        for n in sorted(self.entry(i, j), reverse=True):
            body = "" if n == 0 else ("∂" if n == 1 else f"∂^{n}")
            parts.append(_term_str(self.entry(i, j)[n], body))
        return _join(parts)

    def __str__(self):
        return "; ".join(f"H[{i + 1},{j + 1}] = {self.entry_str(i, j)}"
                         for i, j in sorted(self.entries)) or "0"

    __repr__ = __str__


def operator_from_json(data) -> DiffOperatorMatrix:
    """{l, entries: [{i, j, terms: [{poly, dpow}]}]} with 1-based i, j."""
    from .parsing import parse_expr

    if isinstance(data, str):
        data = json.loads(data)
    l = int(data["l"])
    ent: dict = {}
    for e in data.get("entries", []):
        ops = ent.setdefault((int(e["i"]) - 1, int(e["j"]) - 1), {})
        for t in e.get("terms", []):
            n = int(t.get("dpow", 0))
            ops[n] = ops.get(n, Poly()) + parse_expr(str(t["poly"]), ngens=l)
    return DiffOperatorMatrix(l, ent)


def operator_gauges(H: DiffOperatorMatrix) -> list[ChainGauge]:
    """psi_ij(y) = 1/2 sum_n h_{ji;n} y^n."""
    out = []
    for i in range(H.l):
        for j in range(H.l):
            psi = {(n,): h / 2 for n, h in H.entry(j, i).items()}
            if psi:
                out.append(ChainGauge((i, j), psi))
    return out


def bivector_from_operator(H: DiffOperatorMatrix, N: int):
    """Degree-2 chain of a skew-adjoint operator, with the gauges it was expanded from."""
    bad = H.skew_violation()
    if bad is not None:
        i, j = bad
        raise SkewAdjointViolation(
            f"H is not skew-adjoint at entry ({i + 1}, {j + 1}): H*[{i + 1},{j + 1}] = "
            f"{H.adjoint().entry_str(i, j)}, -H[{i + 1},{j + 1}] = {(-H).entry_str(i, j)}",
            (i + 1, j + 1))
    R, spec = variational_setting(H.l)
    gauges = operator_gauges(H)
    if not gauges:
        return TruncatedChain(R, spec, 2, N), gauges
    return chain_expand(R, spec, gauges, N), gauges


def poisson_order(*ops: DiffOperatorMatrix) -> int:
    """Bound on the total (lambda, mu)-degree of the Jacobi obstruction."""
    D = max(H.d_order for H in ops)
    o = max(max(H.coef_order for H in ops), 0)
    return max(D + o + 2, 2 * D + o)


LAM_, MU_ = Var("l", 1), Var("l", 2)


def _apply_shifted(ops: dict, shift: Poly, F: Poly) -> Poly:
    """sum_k h_k (shift + d)^k F, with shift a polynomial in the lambdas."""
    out = Poly()
    for k, h in ops.items():
        G = F
        for _ in range(k):
            G = shift * G + total_derivative(G)
        out = out + h * G
    return out


def _power_shifted(shift: Poly, n: int, F: Poly) -> Poly:
    for _ in range(n):
        F = shift * F + total_derivative(F)
    return F


def lambda_bracket_gen(H: DiffOperatorMatrix, i: int, g: Poly, lam: Poly) -> Poly:
    """{u_i lam g} = sum_{j,n} dg/du_j^(n) (lam + d)^n H_ji(lam)."""
    out = Poly()
    for v in u_vars(g):
        j = v.index - 1
        ops = H.entry(j, i)
        if not ops:
            continue
        sym = Poly()
        for k, h in ops.items():
            sym = sym + h * lam ** k
        out = out + partial(g, v) * _power_shifted(lam, v.order, sym)
    return out


def lambda_bracket_right(H: DiffOperatorMatrix, f: Poly, k: int, nu: Poly) -> Poly:
    """{f nu u_k} = sum_{i,m} H_ki(nu + d) (-nu - d)^m df/du_i^(m)."""
    out = Poly()
    for v in u_vars(f):
        ops = H.entry(k, v.index - 1)
        if not ops:
            continue
        F = _power_shifted(nu, v.order, partial(f, v)) * sgn(v.order)
        out = out + _apply_shifted(ops, nu, F)
    return out


def jacobiator(H1: DiffOperatorMatrix, H2: DiffOperatorMatrix | None = None) -> dict:
    """{(i, j, k): J} with J(lambda, mu) the Jacobi obstruction of the lambda-bracket.

    J = {u_i lam {u_j mu u_k}} - {u_j mu {u_i lam u_k}} - {{u_i lam u_j} lam+mu u_k},
    where {u_i lam u_j} = H_ji(lam).  With two operators the symmetric
    bilinear part (the compatibility obstruction) is returned.
    """
    if H2 is not None:
        full = jacobiator(H1 + H2)
        a, b = jacobiator(H1), jacobiator(H2)
        out = {}
        for key in set(full) | set(a) | set(b):
            v = full.get(key, Poly()) - a.get(key, Poly()) - b.get(key, Poly())
            if not v.is_zero():
                out[key] = v
        return out
    H = H1
    lam, mu = Poly.var(LAM_), Poly.var(MU_)

    def sym(i, j, x):
        return sum((h * x ** n for n, h in H.entry(j, i).items()), Poly())

    out = {}
    rng = range(H.l)
    for i in rng:
        for j in rng:
            for k in rng:
                J = (lambda_bracket_gen(H, i, sym(j, k, mu), lam)
                     - lambda_bracket_gen(H, j, sym(i, k, lam), mu)
                     - lambda_bracket_right(H, sym(i, j, lam), k, lam + mu))
                if not J.is_zero():
                    out[(i, j, k)] = J
    return out


@dataclass
class PoissonVerdict:
    skew_adjoint: bool
    poisson: bool
    order: int
    obstruction: dict = field(default_factory=dict)
    first_nonzero: str | None = None
    lines: list = field(default_factory=list)

    def __bool__(self):
        return self.poisson

    def report(self) -> str:
        return "\n".join(self.lines)


def _first_nonzero(J: dict, N: int) -> str | None:
    for key in sorted(J):
        names = ",".join(f"u{g + 1}" for g in key)
        return f"J[{names}](λ, μ) = {format_poly(J[key])}"
    return None


def _verdict(H_list, N, name) -> PoissonVerdict:
    need = poisson_order(*H_list)
    if N is None:
        N = max(need, 8)
    if N < need:
        raise InsufficientOrder(f"order {N} is below the soundness bound {need}", need)
    lines = []
    for k, H in enumerate(H_list):
        bad = H.skew_violation()
        tag = "" if len(H_list) == 1 else f" H{k + 1}"
        if bad is not None:
            i, j = bad
            raise SkewAdjointViolation(
                f"{tag.strip() or 'H'} is not skew-adjoint at entry ({i + 1}, {j + 1}): "
                f"H*[{i + 1},{j + 1}] = {H.adjoint().entry_str(i, j)}, "
                f"-H[{i + 1},{j + 1}] = {(-H).entry_str(i, j)}", (i + 1, j + 1))
        lines.append(f"skew-adjoint{tag}: yes")
    J = jacobiator(*H_list) if len(H_list) == 2 else jacobiator(H_list[0])
    # every coefficient has (lambda, mu)-degree <= need <= N, so this check is complete
    J = {k: v for k, v in J.items() if v.degree_in("l") <= N}
    first = _first_nonzero(J, N)
    lines.append(f"{name} obstruction: {'0' if first is None else 'nonzero'} "
                 f"(coefficients checked to order {N})")
    if first:
        lines.append(f"first nonzero coefficient: {first}")
    return PoissonVerdict(True, first is None, N, J, first, lines)


def check_poisson(H: DiffOperatorMatrix, N: int | None = None) -> PoissonVerdict:
    """Skew-adjointness plus vanishing of the Jacobi obstruction (default order 8)."""
    return _verdict([H], N, "Jacobi")


def check_compatible(H1: DiffOperatorMatrix, H2: DiffOperatorMatrix, N: int | None = None) -> PoissonVerdict:
    """Vanishing of the mixed Jacobi obstruction of H1 and H2."""
    if H1.l != H2.l:
        raise DegreeMismatch("operators act on different numbers of generators")
    return _verdict([H1, H2], N, "compatibility")


# JSON

def _parse_label(text: str, ngens: int) -> Var:
    from .parsing import parse_expr

    p = parse_expr(text, ngens=ngens)
    if len(p.terms) != 1:
        raise InvalidStructure(f"{text!r} is not a jet variable")
    (mono, c), = p.terms.items()
    if c != 1 or len(mono) != 1 or mono[0][1] != 1:
        raise InvalidStructure(f"{text!r} is not a jet variable")
    return mono[0][0]


def form_from_json(data) -> DeRhamForm:
    """{ngens, degree, terms: [{poly, du: ["u1", "u1'"]}]}."""
    from .parsing import parse_expr

    if isinstance(data, str):
        data = json.loads(data)
    ngens = int(data.get("ngens", 1))
    terms: dict = {}
    for t in data.get("terms", []):
        labs = tuple(_parse_label(x, ngens) for x in t.get("du", []))
        terms[labs] = terms.get(labs, Poly()) + parse_expr(str(t["poly"]), ngens=ngens)
    degree = int(data.get("degree", len(next(iter(terms), ()))))
    return DeRhamForm(ngens, degree, terms)


def polyvector_from_json(data) -> PolyVectorField:
    """{ngens, degree, terms: [{poly, partials: ["u1", ...]}]}."""
    from .parsing import parse_expr

    if isinstance(data, str):
        data = json.loads(data)
    ngens = int(data.get("ngens", 1))
    terms: dict = {}
    for t in data.get("terms", []):
        labs = tuple(_parse_label(x, ngens) for x in t.get("partials", []))
        s, key = sort_sign(labs)
        if s:
            terms[key] = terms.get(key, Poly()) + parse_expr(str(t["poly"]), ngens=ngens) * s
    return PolyVectorField(ngens, terms, data.get("trust_order"), data.get("degree"))


# non-degeneracy probes

def probe_monomials(ngens: int, max_deg: int = 2, max_order: int = 2) -> list[Poly]:
    jets = [Poly.var(Var("u", i, n)) for i in range(1, ngens + 1) for n in range(max_order + 1)]
    out = [Poly.const(1)]
    for d in range(1, max_deg + 1):
        for combo in combinations_with_replacement(range(len(jets)), d):
            out.append(prod((jets[c] for c in combo), start=Poly.const(1)))
    return out


def probe_fields(ngens: int, max_deg: int = 2, max_order: int = 2) -> list[EvVectorField]:
    """Evolutionary fields with a single monomial characteristic in one component."""
    out = []
    for i in range(ngens):
        for m in probe_monomials(ngens, max_deg, max_order):
            chars = [Poly() for _ in range(ngens)]
            chars[i] = m
            out.append(EvVectorField(chars))
    return out


def find_probe(S: LocalOperator, max_deg: int = 2, max_order: int | None = None):
    """A wedge of probe fields X_1..X_k with S(X_1 ^ ... ^ X_k) nonzero in V/dV, or None."""
    if max_order is None:
        max_order = max(S.cochain.max_order(), 0) + 1
    fields = probe_fields(S.ngens, max_deg, max_order)
    N = S.order()
    polys = [X.as_polyvector(N) for X in fields]
    for idx in combinations_with_replacement(range(len(fields)), S.degree):
        if len(set(idx)) < len(idx):
            continue
        X = polys[idx[0]] if idx else PolyVectorField(S.ngens, {(): Poly.const(1)}, degree=0)
        for i in idx[1:]:
            X = X.wedge(polys[i])
        if not eval_local(S, X).is_zero():
            return [fields[i] for i in idx]
    return None
