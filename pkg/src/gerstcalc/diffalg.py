"""Exact differential polynomial algebra.

A `Poly` is a sparse polynomial with rational coefficients in named
variables.  The differential variables u_i^(n) carry kind ``'u'``; the same
class also holds polynomials in auxiliary variables (lambda's, series
variables, the symbol of the translation operator), so that mixed objects
such as elements of V[lambda_1, ..., lambda_k] need no separate type.

The total derivative acts on ``'u'`` variables only; every other kind is
treated as a constant.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

Rat = Fraction


class Var(NamedTuple):
    """A polynomial variable.

    kind: 'u' differential variable u_index^(order); 'l' lambda_index;
    'd' the symbol of the translation operator; 'x', 'y' series variables;
    'z' coordinates of a plain polynomial algebra.
    """

    kind: str
    index: int
    order: int = 0

    def shifted(self, k: int = 1) -> "Var":
        return Var(self.kind, self.index, self.order + k)


DiffVar = Var


def _norm(c):
    if isinstance(c, Fraction):
        return int(c.numerator) if c.denominator == 1 else c
    return c


@lru_cache(maxsize=1 << 18)
def mono_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


@lru_cache(maxsize=1 << 18)
def _mono_drop(m: tuple, v: Var) -> tuple[int, tuple]:
    """Return (exponent of v, monomial with one factor v removed)."""
    for pos, (w, e) in enumerate(m):
        if w == v:
            if e == 1:
                return e, m[:pos] + m[pos + 1:]
            return e, m[:pos] + ((w, e - 1),) + m[pos + 1:]
    return 0, m


@lru_cache(maxsize=1 << 18)
def _mono_total_derivative(m: tuple) -> tuple:
    """Total derivative of a monomial as a tuple of (monomial, coefficient)."""
    out: dict = {}
    for v, e in m:
        if v.kind != "u":
            continue
        _, rest = _mono_drop(m, v)
        mm = mono_mul(rest, ((v.shifted(), 1),))
        out[mm] = out.get(mm, 0) + e
    return tuple(out.items())


class Poly:
    """Sparse polynomial over Q: a map from monomials to nonzero rationals.

    A monomial is a sorted tuple of (Var, exponent) pairs.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict | None = None, *, _clean: bool = False):
        if terms is None:
            self.terms = {}
        elif _clean:
            self.terms = terms
        else:
            self.terms = {m: _norm(c) for m, c in terms.items() if c != 0}
        self._hash = None

    # construction
    @classmethod
    def const(cls, c) -> "Poly":
        c = _norm(Fraction(c)) if not isinstance(c, int) else c
        return cls({(): c}) if c != 0 else cls()

    @classmethod
    def var(cls, v: Var, exp: int = 1) -> "Poly":
        return cls({((v, exp),): 1}, _clean=True) if exp else cls.const(1)

    @staticmethod
    def coerce(x) -> "Poly":
        if isinstance(x, Poly):
            return x
        if isinstance(x, (int, Fraction)):
            return Poly.const(x)
        raise TypeError(f"cannot coerce {type(x).__name__} to Poly")

    # arithmetic
    def __add__(self, other):
        if not isinstance(other, Poly):
            if not isinstance(other, (int, Fraction)):
                return NotImplemented
            other = Poly.const(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        t = dict(self.terms)
        for m, c in other.terms.items():
            s = t.get(m, 0) + c
            if s == 0:
                t.pop(m, None)
            else:
                t[m] = _norm(s)
        return Poly(t, _clean=True)

    __radd__ = __add__

    def __neg__(self):
        return Poly({m: -c for m, c in self.terms.items()}, _clean=True)

    def __sub__(self, other):
        if not isinstance(other, (Poly, int, Fraction)):
            return NotImplemented
        return self + (-Poly.coerce(other))

    def __rsub__(self, other):
        return Poly.coerce(other) + (-self)

    def scale(self, c) -> "Poly":
        if c == 0:
            return Poly()
        if c == 1:
            return self
        return Poly({m: _norm(v * c) for m, v in self.terms.items()}, _clean=True)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, Poly):
            return NotImplemented
        if not self.terms or not other.terms:
            return Poly()
        t: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = mono_mul(m1, m2)
                t[m] = t.get(m, 0) + c1 * c2
        return Poly(t)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.scale(Fraction(1) / Fraction(c))

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative exponent")
        out, base = Poly.const(1), self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # comparison
    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Poly.const(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_term(self):
        return self.terms.get((), 0)

    # structure
    def variables(self) -> set[Var]:
        return {v for m in self.terms for v, _ in m}

    def degree_in(self, kind: str) -> int:
        return max((sum(e for v, e in m if v.kind == kind) for m in self.terms), default=0)

    def total_degree(self) -> int:
        return max((sum(e for _, e in m) for m in self.terms), default=0)

    def max_order(self, kind: str = "u") -> int:
        """Largest derivative order among variables of the given kind (-1 if none)."""
        return max((v.order for v in self.variables() if v.kind == kind), default=-1)

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"Poly({self})"

    def __str__(self):
        return format_poly(self)


DiffPoly = Poly
LambdaPoly = Poly


def u(i: int = 1, n: int = 0) -> Poly:
    return Poly.var(Var("u", i, n))


def lam(k: int = 1) -> Poly:
    return Poly.var(Var("l", k))


def const(c) -> Poly:
    return Poly.const(c)


def total_derivative(f: Poly, times: int = 1) -> Poly:
    for _ in range(times):
        t: dict = {}
        for m, c in f.terms.items():
            for mm, k in _mono_total_derivative(m):
                t[mm] = t.get(mm, 0) + c * k
        f = Poly(t)
    return f


def partial(f: Poly, v: Var) -> Poly:
    """Formal partial derivative with respect to an arbitrary variable."""
    t: dict = {}
    for m, c in f.terms.items():
        e, rest = _mono_drop(m, v)
        if e:
            t[rest] = t.get(rest, 0) + c * e
    return Poly(t)


def partial_derivative(f: Poly, i: int, n: int = 0) -> Poly:
    return partial(f, Var("u", i, n))


def u_vars(f: Poly, i: int | None = None) -> list[Var]:
    return sorted(v for v in f.variables() if v.kind == "u" and (i is None or v.index == i))


def lambda_action(i: int, f: Poly, lam_var: Var = Var("l", 1)) -> Poly:
    """u_{i lambda} f = sum_n lambda^n df/du_i^(n)."""
    out = Poly()
    for v in u_vars(f, i):
        out = out + partial(f, v) * Poly.var(lam_var, v.order)
    return out


def variational_derivative(f: Poly, i: int) -> Poly:
    """Euler operator sum_n (-d)^n df/du_i^(n)."""
    out = Poly()
    for v in u_vars(f, i):
        g = total_derivative(partial(f, v), v.order)
        out = out + (g if v.order % 2 == 0 else -g)
    return out


def generators(f: Poly) -> list[int]:
    return sorted({v.index for v in f.variables() if v.kind == "u"})


def antiderivative(f: Poly, max_steps: int = 10_000) -> Poly | None:
    """Return g with f = dg, or None when f is not a total derivative.

    Only the pure polynomial algebra is supported.  Non-u variables are
    treated as constants.
    """
    if f.is_zero():
        return Poly()
    # a nonzero free term (in u) can never be exact
    if any(all(v.kind != "u" for v, _ in m) for m in f.terms):
        return None
    if any(not variational_derivative(f, i).is_zero() for i in generators(f)):
        return None
    g = Poly()
    for _ in range(max_steps):
        if f.is_zero():
            return g
        top = max(u_vars(f), key=lambda v: (v.order, v.index))
        if top.order == 0:
            return None
        a = partial(f, top)
        if top in a.variables() or a.max_order() >= top.order:
            return None
        low = Var("u", top.index, top.order - 1)
        G = integrate(a, low)
        g = g + G
        f = f - total_derivative(G)
    raise RuntimeError("antiderivative did not terminate")


def integrate(f: Poly, v: Var) -> Poly:
    """Polynomial antiderivative in the single variable v."""
    t: dict = {}
    for m, c in f.terms.items():
        e, _ = _mono_drop(m, v)
        mm = mono_mul(m, ((v, 1),))
        t[mm] = t.get(mm, 0) + Fraction(c, e + 1)
    return Poly(t)


def is_total_derivative(f: Poly) -> bool:
    return antiderivative(f) is not None


def quotient_equal(f: Poly, g: Poly) -> bool:
    """Equality of the classes of f and g in V / dV."""
    return is_total_derivative(f - g)


def substitute(f: Poly, subs: dict) -> Poly:
    """Replace variables by polynomials; subs maps Var -> Poly."""
    out = Poly()
    cache: dict = {}
    for m, c in f.terms.items():
        term = Poly.const(c)
        keep = []
        for v, e in m:
            if v in subs:
                key = (v, e)
                if key not in cache:
                    cache[key] = Poly.coerce(subs[v]) ** e
                term = term * cache[key]
            else:
                keep.append((v, e))
        if keep:
            term = term * Poly({tuple(keep): 1}, _clean=True)
        out = out + term
    return out


def rename(f: Poly, fn) -> Poly:
    """Apply a variable renaming fn: Var -> Var (must be injective on f)."""
    t: dict = {}
    for m, c in f.terms.items():
        mm: tuple = ()
        for v, e in m:
            mm = mono_mul(mm, ((fn(v), e),))
        t[mm] = t.get(mm, 0) + c
    return Poly(t)


def split(f: Poly, kinds: Iterable[str]) -> dict[tuple, Poly]:
    """Split f by the monomial in variables of the given kinds.

    Returns {monomial in those kinds: coefficient polynomial in the rest}.
    """
    kinds = set(kinds)
    out: dict = {}
    for m, c in f.terms.items():
        a = tuple(p for p in m if p[0].kind in kinds)
        b = tuple(p for p in m if p[0].kind not in kinds)
        out.setdefault(a, {})[b] = c
    return {a: Poly(t, _clean=True) for a, t in out.items()}


def coefficients_in(f: Poly, v: Var) -> dict[int, Poly]:
    """{exponent e: coefficient of v^e} for a single variable v."""
    out: dict = {}
    for m, c in f.terms.items():
        e = 0
        rest = []
        for w, k in m:
            if w == v:
                e = k
            else:
                rest.append((w, k))
        out.setdefault(e, {})[tuple(rest)] = c
    return {e: Poly(t, _clean=True) for e, t in out.items()}


def from_mono(m: tuple, c=1) -> Poly:
    return Poly({m: c})


# printing

def format_rat(c) -> str:
    c = _norm(Fraction(c))
    return str(c)


def format_var(v: Var) -> str:
    if v.kind == "u":
        base = f"u{v.index}"
        if v.order <= 3:
            return base + "'" * v.order
        return f"{base}({v.order})"
    if v.kind == "l":
        return f"λ{v.index}"
    if v.kind == "d":
        return "∂"
    name = f"{v.kind}{v.index}"
    return name if v.order == 0 else f"{name}({v.order})"


def format_mono(m: tuple) -> str:
    parts = []
    for v, e in m:
        s = format_var(v)
        parts.append(s if e == 1 else f"{s}^{e}")
    return "*".join(parts)


def _mono_key(m: tuple):
    return (sum(e for _, e in m), m)


def format_poly(f: Poly) -> str:
    if not f.terms:
        return "0"
    out = []
    for m in sorted(f.terms, key=_mono_key):
        c = f.terms[m]
        neg = c < 0
        a = -c if neg else c
        if not m:
            body = format_rat(a)
        elif a == 1:
            body = format_mono(m)
        else:
            body = f"{format_rat(a)}*{format_mono(m)}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)
