"""Cochains and chains of a Lie conformal algebra R with coefficients in V.

Cochains of degree k are stored per nondecreasing generator tuple as a
representative in V[lambda_1..lambda_k]; equality is taken modulo
(d + lambda_1 + ... + lambda_k) by eliminating lambda_k.  With ``basic=True``
the quotient is dropped and equality is coefficientwise.

Chains of degree h are skewsymmetric tensors of truncated power series:
coefficient c_n of x^n for |n| <= trust.  A chain X represents
sum over all ordered tuples t of a_t (x) X_t; only nondecreasing tuples are
stored.
"""

from __future__ import annotations

import json
from fractions import Fraction
from itertools import combinations_with_replacement, permutations, product
from math import factorial, prod

from .conformal import LAM, LCAPresentation, ModuleSpec
from .diffalg import (Poly, Var, coefficients_in, is_total_derivative, substitute,
                      total_derivative)
from .errors import DegreeMismatch, InsufficientOrder, InvalidStructure, NonzeroBracket
from .gerstenhaber import Calculus, cartan_lie_derivative, sgn, sort_sign


def lv(s: int) -> Var:
    return Var("l", s)


def _tmp(s: int) -> Var:
    return Var("l", 1000 + s)


def sorting_perms(t: tuple) -> list[tuple[tuple, int]]:
    """All position permutations p with t[p[0]] <= t[p[1]] <= ..., with their signs."""
    base = sorted(range(len(t)), key=lambda i: (t[i], i))
    groups: list[list[int]] = []
    for i in base:
        if groups and t[groups[-1][0]] == t[i]:
            groups[-1].append(i)
        else:
            groups.append([i])
    out = []
    for choice in product(*(permutations(g) for g in groups)):
        p = tuple(i for g in choice for i in g)
        out.append((p, sort_sign(p)[0]))
    return out


def multiplicity(s: tuple) -> int:
    """Number of distinct orderings of the tuple s."""
    out = factorial(len(s))
    for g in set(s):
        out //= factorial(s.count(g))
    return out


def _stab_perms(s: tuple) -> list[tuple[tuple, int]]:
    return sorting_perms(s)


# cochains

class ConformalCochain:
    """Element of C^k(R, V) (or of the basic complex when basic=True)."""

    __slots__ = ("R", "spec", "degree", "values", "basic")

    def __init__(self, R: LCAPresentation, spec: ModuleSpec, degree: int,
                 values: dict | None = None, basic: bool = False):
        self.R, self.spec, self.degree, self.basic = R, spec, degree, basic
        store: dict = {}
        if degree >= 0:
            for t, v in (values or {}).items():
                t = tuple(t)
                v = Poly.coerce(v)
                if len(t) != degree:
                    raise DegreeMismatch(f"tuple {t} does not have length {degree}")
                if v.is_zero():
                    continue
                for g in t:
                    if not 0 <= g < R.rank:
                        raise InvalidStructure(f"generator index {g} out of range")
                perms = sorting_perms(t)
                p, s = perms[0]
                key = tuple(t[i] for i in p)
                # value at t has lambda_a in slot a; slot a of t is slot p^-1(a) of key
                inv = {p[a]: a for a in range(degree)}
                v = substitute(v, {lv(a + 1): Poly.var(_tmp(inv[a] + 1)) for a in range(degree)})
                v = substitute(v, {_tmp(a + 1): Poly.var(lv(a + 1)) for a in range(degree)})
                store[key] = store.get(key, Poly()) + v * s
            for key in list(store):
                store[key] = self._project(key, store[key])
        self.values = {k: v for k, v in store.items() if not v.is_zero()}

    @staticmethod
    def _project(key: tuple, v: Poly) -> Poly:
        perms = _stab_perms(key)
        if len(perms) == 1:
            return v
        out = Poly()
        for p, s in perms:
            out = out + permute_lambdas(v, p) * s
        return out / len(perms)

    def like(self, degree: int, values: dict | None = None) -> "ConformalCochain":
        return ConformalCochain(self.R, self.spec, degree, values, self.basic)

    def value_at(self, t: tuple, lams: list[Poly]) -> Poly:
        """Representative of c_{lams}(a_t) for an arbitrary ordered tuple t."""
        p, s = sorting_perms(t)[0]
        key = tuple(t[i] for i in p)
        v = self.values.get(key)
        if v is None:
            return Poly()
        # slot a of key holds t[p[a]] with variable lams[p[a]]
        return substitute(v, {lv(a + 1): lams[p[a]] for a in range(len(t))}) * s

    def lambda_degree(self) -> int:
        return max((v.degree_in("l") for v in self.values.values()), default=0)

    def max_order(self) -> int:
        return max((v.max_order() for v in self.values.values()), default=-1)

    def normal_form(self) -> dict:
        if self.basic or self.degree <= 0:
            return dict(self.values)
        out = {}
        for k, v in self.values.items():
            nf = eliminate_last(v, self.degree)
            if not nf.is_zero():
                out[k] = nf
        return out

    def is_zero(self) -> bool:
        if self.degree < 0 or not self.values:
            return True
        if self.degree == 0 and not self.basic:
            return is_total_derivative(self.values.get((), Poly()))
        return not self.normal_form()

    def _combine(self, other, c):
        if not isinstance(other, ConformalCochain):
            if isinstance(other, int) and other == 0:
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
        out = ConformalCochain.__new__(ConformalCochain)
        out.R, out.spec, out.degree, out.basic = self.R, self.spec, self.degree, self.basic
        out.values = {k: v for k, v in t.items() if not v.is_zero()}
        return out

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, c):
        out = ConformalCochain.__new__(ConformalCochain)
        out.R, out.spec, out.degree, out.basic = self.R, self.spec, self.degree, self.basic
        out.values = {k: v * c for k, v in self.values.items()} if c != 0 else {}
        return out

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, ConformalCochain) and (self - other).is_zero()

    def projected(self) -> "ConformalCochain":
        """Image of a basic cochain in the quotient complex."""
        return ConformalCochain(self.R, self.spec, self.degree, self.values, basic=False)

    def __str__(self):
        if not self.values:
            return "0"
        names = self.R.names
        return "; ".join(f"c({','.join(names[i] for i in k)}) = {v}"
                         for k, v in sorted(self.values.items()))

    __repr__ = __str__


def permute_lambdas(v: Poly, p: tuple) -> Poly:
    """Rename lambda_{a+1} -> lambda_{p[a]+1}."""
    k = len(p)
    v = substitute(v, {lv(a + 1): Poly.var(_tmp(p[a] + 1)) for a in range(k)})
    return substitute(v, {_tmp(a + 1): Poly.var(lv(a + 1)) for a in range(k)})


def eliminate_last(v: Poly, k: int) -> Poly:
    """Replace lambda_k^m by (-lambda_1 - ... - lambda_{k-1} - d)^m, d acting on V."""
    s = Poly()
    for a in range(1, k):
        s = s + Poly.var(lv(a))
    out = Poly()
    for m, g in coefficients_in(v, lv(k)).items():
        for _ in range(m):
            g = -(s * g) - total_derivative(g)
        out = out + g
    return out


def cochain_equal(c1: ConformalCochain, c2: ConformalCochain) -> bool:
    return (c1 - c2).is_zero()


def to_poly_lambda(c: ConformalCochain) -> dict:
    """Poly-lambda-bracket form: lambda_k eliminated, values in V[lambda_1..lambda_{k-1}]."""
    return c.normal_form()


def from_poly_lambda(R: LCAPresentation, spec: ModuleSpec, degree: int, data: dict) -> ConformalCochain:
    return ConformalCochain(R, spec, degree, data)


def cochain_d(c: ConformalCochain) -> ConformalCochain:
    R, spec, k = c.R, c.spec, c.degree
    if k < 0:
        return c.like(k + 1)
    lams = [Poly.var(lv(a + 1)) for a in range(k + 1)]
    out = {}
    for x in combinations_with_replacement(range(R.rank), k + 1):
        val = Poly()
        for i in range(k + 1):
            rest = x[:i] + x[i + 1:]
            v = c.value_at(rest, lams[:i] + lams[i + 1:])
            if not v.is_zero():
                val = val + spec.act(x[i], v, lams[i]) * sgn(i)
        for i in range(k + 1):
            for j in range(i + 1, k + 1):
                terms = R.terms(x[i], x[j])
                if not terms:
                    continue
                lij = lams[i] + lams[j]
                sub_l = lams[:i] + [lij] + lams[i + 1:j] + lams[j + 1:]
                for coef, p, q, g in terms:
                    t = x[:i] + (g,) + x[i + 1:j] + x[j + 1:]
                    v = c.value_at(t, sub_l)
                    if v.is_zero():
                        continue
                    val = val + v * (lams[i] ** p) * ((-lij) ** q) * (coef * sgn(j))
        if not val.is_zero():
            out[x] = val
    return c.like(k + 1, out)


# chains

class TruncatedChain:
    """Degree-h chain known up to total series degree `trust`.

    coeffs: {nondecreasing generator tuple: {multi-index n: Poly}}.
    """

    __slots__ = ("R", "spec", "degree", "trust", "coeffs")

    def __init__(self, R, spec, degree: int, trust: int, coeffs: dict | None = None):
        self.R, self.spec, self.degree, self.trust = R, spec, degree, trust
        self.coeffs = {}
        for s, ser in (coeffs or {}).items():
            ser = {n: v for n, v in ser.items() if sum(n) <= trust and not v.is_zero()}
            if ser:
                self.coeffs[s] = ser

    @classmethod
    def from_raw(cls, R, spec, degree: int, trust: int, raw: dict) -> "TruncatedChain":
        """Skewsymmetrize raw = {(ordered tuple t, n): coefficient}, read as sum_t a_t (x) F_t."""
        norm = Fraction(1, factorial(degree))
        store: dict = {}
        perm_cache: dict = {}
        for (t, n), v in raw.items():
            if v.is_zero() or sum(n) > trust:
                continue
            perms = perm_cache.get(t)
            if perms is None:
                perms = perm_cache[t] = sorting_perms(t)
            key = tuple(t[i] for i in perms[0][0])
            ser = store.setdefault(key, {})
            for p, s in perms:
                m = tuple(n[i] for i in p)
                ser[m] = ser.get(m, Poly()) + v * (s * norm)
        return cls(R, spec, degree, trust, store)

    def like(self, degree, trust, coeffs=None):
        return TruncatedChain(self.R, self.spec, degree, trust, coeffs)

    def series(self, t: tuple) -> dict:
        """Coefficients of the component at an arbitrary ordered tuple t."""
        p, s = sorting_perms(t)[0]
        key = tuple(t[i] for i in p)
        ser = self.coeffs.get(key, {})
        inv = [0] * len(t)
        for a, i in enumerate(p):
            inv[i] = a
        # stored index m at slot a corresponds to slot p[a] of t
        return {tuple(m[inv[i]] for i in range(len(t))): v * s for m, v in ser.items()}

    def components(self):
        """(tuple, multiplicity, series) with X = sum over tuples of mult * a_t (x) series."""
        for s, ser in self.coeffs.items():
            yield s, multiplicity(s), ser

    def max_order(self, upto: int | None = None) -> int:
        upto = self.trust if upto is None else upto
        return max((v.max_order() for ser in self.coeffs.values() for n, v in ser.items()
                    if sum(n) <= upto), default=-1)

    def truncate(self, N: int) -> "TruncatedChain":
        if N > self.trust:
            raise InsufficientOrder(f"cannot raise trust order {self.trust} to {N}", N)
        return self.like(self.degree, N, self.coeffs)

    def satisfies_constraint(self) -> bool:
        """Check sum_j (n_j + 1) c_{n+e_j} = d c_n for |n| < trust."""
        h = self.degree
        for s, ser in self.coeffs.items():
            for n in _indices(h, self.trust - 1):
                lhs = Poly()
                for j in range(h):
                    m = n[:j] + (n[j] + 1,) + n[j + 1:]
                    c = ser.get(m)
                    if c is not None:
                        lhs = lhs + c * (n[j] + 1)
                if lhs != total_derivative(ser.get(n, Poly())):
                    return False
        return True

    def _combine(self, other, c):
        if not isinstance(other, TruncatedChain):
            if isinstance(other, int) and other == 0:
                return self
            return NotImplemented
        if other.degree != self.degree:
            if other.is_zero():
                return self
            if self.is_zero():
                return other * c
            raise DegreeMismatch(f"cannot add chains of degree {self.degree} and {other.degree}")
        N = min(self.trust, other.trust)
        t = {s: dict(ser) for s, ser in self.coeffs.items()}
        for s, ser in other.coeffs.items():
            d = t.setdefault(s, {})
            for n, v in ser.items():
                d[n] = d.get(n, Poly()) + v * c
        return self.like(self.degree, N, t)

    def __add__(self, other):
        return self._combine(other, 1)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return self * -1

    def __mul__(self, c):
        return self.like(self.degree, self.trust,
                         {s: {n: v * c for n, v in ser.items()} for s, ser in self.coeffs.items()})

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        """Zero within the trust order (the only decidable notion of equality)."""
        return not self.coeffs

    def __eq__(self, other):
        return isinstance(other, TruncatedChain) and (self - other).is_zero()

    def __str__(self):
        if not self.coeffs:
            return f"0 [trust {self.trust}]"
        names = self.R.names
        parts = []
        for s in sorted(self.coeffs):
            ser = self.coeffs[s]
            body = ", ".join(f"x^{n}: {ser[n]}" for n in sorted(ser, key=lambda n: (sum(n), n)))
            parts.append(f"{'⊗'.join(names[i] for i in s) or '1'} ⊗ {{{body}}}")
        return f"{' + '.join(parts)} [trust {self.trust}]"

    __repr__ = __str__


def _indices(h: int, N: int):
    """All multi-indices of length h with total degree <= N."""
    if N < 0:
        return
    if h == 0:
        yield ()
        return
    for a in range(N + 1):
        for rest in _indices(h - 1, N - a):
            yield (a,) + rest


class ChainGauge:
    """Generating data phi = e^{x_h d} psi(x_1 - x_h, ..., x_{h-1} - x_h) on one tuple.

    psi: {multi-index of length h-1: Poly}.
    """

    def __init__(self, gens: tuple, psi: dict):
        self.gens = tuple(gens)
        self.psi = {tuple(a): Poly.coerce(v) for a, v in psi.items() if not Poly.coerce(v).is_zero()}
        for a in self.psi:
            if len(a) != max(len(self.gens) - 1, 0):
                raise InvalidStructure("gauge multi-index has the wrong length")

    def series(self, N: int) -> dict:
        h = len(self.gens)
        if h == 0:
            return {(): self.psi.get((), Poly())} if self.psi else {}
        out: dict = {}
        xs = [Poly.var(Var("x", i + 1)) for i in range(h)]
        for alpha, p in self.psi.items():
            base = Poly.const(1)
            for i, a in enumerate(alpha):
                base = base * (xs[i] - xs[-1]) ** a
            # p^(m)/m! x_h^m
            dp = p
            for m in range(N - sum(alpha) + 1):
                term = base * xs[-1] ** m
                for mono, c in term.terms.items():
                    e = dict(mono)
                    n = tuple(e.get(Var("x", i + 1), 0) for i in range(h))
                    out[n] = out.get(n, Poly()) + dp * Fraction(c, factorial(m))
                dp = total_derivative(dp)
        return out


def chain_expand(R, spec, gauges, N: int) -> TruncatedChain:
    """Expand gauge data into a truncated chain with trust order N."""
    if isinstance(gauges, ChainGauge):
        gauges = [gauges]
    gauges = list(gauges)
    if not gauges:
        raise InvalidStructure("at least one gauge is needed to fix the degree")
    h = len(gauges[0].gens)
    raw: dict = {}
    for g in gauges:
        if len(g.gens) != h:
            raise DegreeMismatch("gauges of different degrees")
        if h == 0 and any(not total_derivative(v).is_zero() for v in g.psi.values()):
            raise InvalidStructure("a 0-chain must be annihilated by d")
        for n, v in g.series(N).items():
            key = (g.gens, n)
            raw[key] = raw.get(key, Poly()) + v
    return TruncatedChain.from_raw(R, spec, h, N, raw)


def vector_chain(R, spec, chars: list[Poly], N: int) -> TruncatedChain:
    """1-chain sum_i a_i (x) e^{x d} P_i."""
    return chain_expand(R, spec, [ChainGauge((i,), {(): P}) for i, P in enumerate(chars)], N)


def chain_unit(R, spec, N: int = 0, c=1) -> TruncatedChain:
    return TruncatedChain(R, spec, 0, N, {(): {(): Poly.coerce(c)}})


def chain_wedge(X: TruncatedChain, Y: TruncatedChain) -> TruncatedChain:
    h, k = X.degree, Y.degree
    N = min(X.trust, Y.trust)
    raw: dict = {}
    for s, ms, fs in X.components():
        for t, mt, ft in Y.components():
            w = ms * mt
            for n, a in fs.items():
                if sum(n) > N:
                    continue
                for m, b in ft.items():
                    if sum(n) + sum(m) > N:
                        continue
                    key = (s + t, n + m)
                    raw[key] = raw.get(key, Poly()) + a * b * w
    return TruncatedChain.from_raw(X.R, X.spec, h + k, N, raw)


def _falling(a: int, p: int) -> int:
    """(a + p)! / a!"""
    out = 1
    for i in range(1, p + 1):
        out *= a + i
    return out


def bracket_requirements(X: TruncatedChain, Y: TruncatedChain, N_out: int) -> tuple[int, int]:
    """Input trust orders sufficient for output coefficients up to N_out."""
    R, spec = X.R, X.spec
    pq = max((p + q for i in range(R.rank) for j in range(R.rank)
              for _, p, q, _ in R.terms(i, j)), default=0)
    qq = max((q for i in range(R.rank) for j in range(R.rank)
              for _, _, q, _ in R.terms(i, j)), default=0)
    need_x, need_y = N_out + pq, N_out + qq
    if not spec.is_zero():
        td = spec.max_lambda_degree()
        oy, ox = Y.max_order(min(N_out, Y.trust)), X.max_order(min(N_out, X.trust))
        if Y.degree > 0 and X.degree > 0:
            need_x = max(need_x, N_out + td + max(oy, 0))
        if X.degree > 0 and Y.degree > 0:
            need_y = max(need_y, N_out + td + max(ox, 0))
        if X.degree > 0:
            need_x = max(need_x, N_out)
        if Y.degree > 0:
            need_y = max(need_y, N_out)
    return need_x, need_y


def bracket_trust(X: TruncatedChain, Y: TruncatedChain) -> int:
    """Largest output order the inputs support (-1 if none)."""
    best = -1
    for N in range(min(X.trust, Y.trust) + 1):
        nx, ny = bracket_requirements(X, Y, N)
        if nx <= X.trust and ny <= Y.trust:
            best = N
        else:
            break
    return best


def _act_series(spec, i: int, ser: dict, upto: int) -> dict:
    """{n: {p: coefficient of lambda^p in a_{i lambda} ser[n]}} for |n| <= upto."""
    out = {}
    for n, v in ser.items():
        if sum(n) > upto:
            continue
        a = spec.act(i, v, LAM)
        if not a.is_zero():
            out[n] = coefficients_in(a, LAM)
    return out


def chain_bracket(X: TruncatedChain, Y: TruncatedChain, order: int | None = None) -> TruncatedChain:
    """Gerstenhaber bracket of chains, with a sound output trust order.

    order: requested output trust order; InsufficientOrder reports the input
    order it would need.  By default the largest supported order is used.
    """
    R, spec = X.R, X.spec
    h, hp = X.degree, Y.degree
    K = h + hp - 1
    if order is None:
        N = bracket_trust(X, Y)
        if N < 0:
            nx, ny = bracket_requirements(X, Y, 0)
            raise InsufficientOrder(f"inputs need trust orders ({nx}, {ny}) for any output", max(nx, ny))
    else:
        N = order
        nx, ny = bracket_requirements(X, Y, N)
        if nx > X.trust or ny > Y.trust:
            raise InsufficientOrder(f"output order {N} needs input trust orders ({nx}, {ny}), "
                                    f"have ({X.trust}, {Y.trust})", max(nx, ny))
    if K < 0:
        return X.like(max(K, 0), N)
    raw: dict = {}

    def add(t, n, v):
        if sum(n) <= N and not v.is_zero():
            key = (t, n)
            raw[key] = raw.get(key, Poly()) + v

    for s, ms, phi in X.components():
        for t, mt, psi in Y.components():
            w = ms * mt
            # term 1: bracket of a_i (X side) with a_j (Y side)
            for i in range(h):
                for jj in range(hp):
                    sign1 = sgn(jj)
                    for coef, p, q, g in R.terms(s[i], t[jj]):
                        out_t = s[:i] + (g,) + s[i + 1:] + t[:jj] + t[jj + 1:]
                        # G(n) = sum_{a+b=n_i} phi'(n with n_i=a) psi(rest with b at jj)
                        G: dict = {}
                        for na, va in phi.items():
                            if na[i] < p:
                                continue
                            a = na[i] - p
                            va2 = va * _falling(a, p)
                            for nb, vb in psi.items():
                                b = nb[jj]
                                rest = nb[:jj] + nb[jj + 1:]
                                n = na[:i] + (a + b,) + na[i + 1:] + rest
                                if sum(n) > N + q:
                                    continue
                                G[n] = G.get(n, Poly()) + va2 * vb
                        for n, v in G.items():
                            if n[i] < q:
                                continue
                            m = n[:i] + (n[i] - q,) + n[i + 1:]
                            add(out_t, m, v * (coef * w * sign1 * sgn(q) * _falling(n[i] - q, q)))
            if spec.is_zero():
                continue
            # term 2: a_i (X side) acting on psi, lambda^p -> p! phi at slot i
            for i in range(h):
                act = _act_series(spec, s[i], psi, N)
                if not act:
                    continue
                out_t = s[:i] + s[i + 1:] + t
                sign2 = sgn(h + i + 1)
                for na, va in phi.items():
                    p = na[i]
                    rest = na[:i] + na[i + 1:]
                    for nb, coeffs in act.items():
                        c = coeffs.get(p)
                        if c is None:
                            continue
                        add(out_t, rest + nb, va * c * (w * sign2 * factorial(p)))
            # term 3: a_j (Y side) acting on phi, lambda^p -> p! psi at slot j
            for jj in range(hp):
                act = _act_series(spec, t[jj], phi, N)
                if not act:
                    continue
                out_t = s + t[:jj] + t[jj + 1:]
                sign3 = sgn(jj + 1)
                for nb, vb in psi.items():
                    p = nb[jj]
                    rest = nb[:jj] + nb[jj + 1:]
                    for na, coeffs in act.items():
                        c = coeffs.get(p)
                        if c is None:
                            continue
                        add(out_t, na + rest, vb * c * (w * sign3 * factorial(p)))
    return TruncatedChain.from_raw(R, spec, K, N, raw)


def chain_d(X: TruncatedChain) -> TruncatedChain:
    """Chain differential dual to the cochain one; defined only for the zero action.

    d(a_1..a_k (x) phi) = sum_{i<j} (-1)^(j+1) a_1..[a_i d_{x_i} a_j]..(omit j)..a_k
                          (x) phi(x_1..y at j..x_{k-1})|_{y=x_i}
    """
    R, spec = X.R, X.spec
    if not spec.is_zero():
        raise NonzeroBracket("the dual chain differential needs a trivial lambda-action")
    k = X.degree
    if k < 2:
        return X.like(max(k - 1, 0), X.trust)
    pq = max((p + q for i in range(R.rank) for j in range(R.rank)
              for _, p, q, _ in R.terms(i, j)), default=0)
    N = X.trust - pq
    if N < 0:
        raise InsufficientOrder("trust order too small for the chain differential", pq)
    raw: dict = {}
    for s, ms, phi in X.components():
        for i in range(k):
            for j in range(i + 1, k):
                for coef, p, q, g in R.terms(s[i], s[j]):
                    out_t = s[:i] + (g,) + s[i + 1:j] + s[j + 1:]
                    G: dict = {}
                    for n, v in phi.items():
                        # lambda^p -> d_{x_i}^p on phi, then merge y = x_j into x_i
                        if n[i] < p:
                            continue
                        a = n[i] - p
                        m = n[:i] + (a + n[j],) + n[i + 1:j] + n[j + 1:]
                        G[m] = G.get(m, Poly()) + v * _falling(a, p)
                    for m, v in G.items():
                        if m[i] < q:
                            continue
                        mm = m[:i] + (m[i] - q,) + m[i + 1:]
                        if sum(mm) > N:
                            continue
                        key = (out_t, mm)
                        val = v * (coef * ms * sgn(j) * sgn(q) * _falling(m[i] - q, q))
                        raw[key] = raw.get(key, Poly()) + val
    return TruncatedChain.from_raw(R, spec, k - 1, N, raw)


def chain_d_zero_bracket(X: TruncatedChain) -> TruncatedChain:
    """The chain differential for a zero lambda-bracket: identically zero."""
    if not X.R.is_zero():
        raise NonzeroBracket("chain_d_zero_bracket needs a zero lambda-bracket")
    return X.like(max(X.degree - 1, 0), X.trust)


# contraction and Lie derivative

def _pair(ser: dict, v: Poly, tmps: list[Var], trust: int, n_weight: bool = True) -> Poly:
    """sum_n ser[n] * n! * [coefficient of tmp^n in v]."""
    if v.is_zero():
        return v
    tset = set(tmps)
    parts: dict = {}
    for m, c in v.terms.items():
        a = tuple(e for e in m if e[0] in tset)
        b = tuple(e for e in m if e[0] not in tset)
        parts.setdefault(a, {})[b] = c
    out = Poly()
    for a, rest in parts.items():
        e = dict(a)
        n = tuple(e.get(t, 0) for t in tmps)
        if sum(n) > trust:
            raise InsufficientOrder(f"contraction needs chain coefficients of order {sum(n)}, "
                                    f"trust order is {trust}", sum(n))
        c = ser.get(n)
        if c is None:
            continue
        w = prod(factorial(x) for x in n) if n_weight else 1
        out = out + c * Poly(rest) * w
    return out


def contract(X: TruncatedChain, c: ConformalCochain, strict: bool = True) -> ConformalCochain:
    """(iota_X c)(a_{h+1}..a_k) = (-1)^(h(h-1)/2) phi(d_lambda_1..d_lambda_h) c |_{lambda_1..h = 0}."""
    h, k = X.degree, c.degree
    if h > k:
        if strict and k > 0:
            raise DegreeMismatch(f"cannot contract a degree-{h} chain into a degree-{k} cochain")
        return c.like(k - h)
    s0 = sgn(h * (h - 1) // 2)
    tmps = [_tmp(a + 1) for a in range(h)]
    lams = [Poly.var(t) for t in tmps] + [Poly.var(lv(a + 1)) for a in range(k - h)]
    out = {}
    for r in combinations_with_replacement(range(c.R.rank), k - h):
        val = Poly()
        for s, ms, ser in X.components():
            v = c.value_at(s + r, lams)
            val = val + _pair(ser, v, tmps, X.trust) * ms
        if not val.is_zero():
            out[r] = val * s0
    return c.like(k - h, out)


def lie_derive(X: TruncatedChain, c: ConformalCochain, strict: bool = True) -> ConformalCochain:
    """Lie derivative by Cartan's formula."""
    h, k = X.degree, c.degree
    if strict and h > k + 1 and k > 0:
        raise DegreeMismatch(f"Lie derivative of degree {h} on a degree-{k} cochain")
    return cartan_lie_derivative(lambda w: contract(X, w, strict=False), cochain_d, h)(c)


def lie_derive_explicit(X: TruncatedChain, c: ConformalCochain) -> ConformalCochain:
    """Closed formula for L_X c, without passing through d c."""
    R, spec = c.R, c.spec
    h, k = X.degree, c.degree
    if h > k + 1:
        return c.like(k - h + 1)
    s0 = sgn(h * (h - 1) // 2)
    tmps = [_tmp(a + 1) for a in range(h)]
    lams = [Poly.var(t) for t in tmps] + [Poly.var(lv(a + 1)) for a in range(k + 1 - h)]
    out = {}
    for r in combinations_with_replacement(range(R.rank), k + 1 - h):
        val = Poly()
        for s, ms, ser in X.components():
            x = s + r
            for i in range(k + 1):
                rest = x[:i] + x[i + 1:]
                v = c.value_at(rest, lams[:i] + lams[i + 1:])
                if v.is_zero():
                    continue
                if i < h:
                    a = spec.act(x[i], v, lams[i])
                    val = val + _pair(ser, a, tmps, X.trust) * (ms * sgn(i))
                else:
                    # a_{i lambda_i} acts on the chain coefficients
                    acted = {}
                    for n, cn in ser.items():
                        acted[n] = spec.act(x[i], cn, lams[i])
                    val = val + _pair(acted, v, tmps, X.trust) * (ms * sgn(i + 1))
            for i in range(h):
                for j in range(i + 1, k + 1):
                    terms = R.terms(x[i], x[j])
                    if not terms:
                        continue
                    lij = lams[i] + lams[j]
                    sub_l = lams[:i] + [lij] + lams[i + 1:j] + lams[j + 1:]
                    for coef, p, q, g in terms:
                        t = x[:i] + (g,) + x[i + 1:j] + x[j + 1:]
                        v = c.value_at(t, sub_l)
                        if v.is_zero():
                            continue
                        v = v * (lams[i] ** p) * ((-lij) ** q) * (coef * sgn(j))
                        val = val + _pair(ser, v, tmps, X.trust) * ms
        if not val.is_zero():
            out[r] = val * s0
    return c.like(k + 1 - h, out)


def build_conformal_calculus(R: LCAPresentation, spec: ModuleSpec, basic: bool = False) -> Calculus:
    return Calculus(
        wedge=chain_wedge, bracket=chain_bracket, d=cochain_d,
        contract=lambda X, c: contract(X, c, strict=False),
        lie=lambda X, c: lie_derive(X, c, strict=False),
        name=f"{'basic ' if basic else ''}conformal {R.names}",
    )


# JSON

def cochain_from_json(R, spec, data, basic: bool = False) -> ConformalCochain:
    """{degree, entries: [{gens: [i..] (1-based), poly: "..."}]} with lambdas written l1, l2, ..."""
    from .parsing import default_resolver, parse_expr

    if isinstance(data, str):
        data = json.loads(data)
    base = default_resolver(spec.ngens)

    def resolve(name):
        if name.startswith("l") and name[1:].isdigit():
            return lv(int(name[1:]))
        return base(name)

    vals = {}
    for e in data.get("entries", []):
        t = tuple(g - 1 for g in e["gens"])
        vals[t] = vals.get(t, Poly()) + parse_expr(e["poly"], resolve=resolve)
    return ConformalCochain(R, spec, data["degree"], vals, basic)


def chain_from_json(R, spec, data) -> TruncatedChain:
    """{degree, trust_order, entries: [{gens, mindex, poly}]}; entries are raw (skewsymmetrized)."""
    from .parsing import parse_expr

    if isinstance(data, str):
        data = json.loads(data)
    raw = {}
    for e in data.get("entries", []):
        key = (tuple(g - 1 for g in e["gens"]), tuple(e["mindex"]))
        raw[key] = raw.get(key, Poly()) + parse_expr(e["poly"], ngens=spec.ngens)
    return TruncatedChain.from_raw(R, spec, data["degree"], data["trust_order"], raw)
