"""Seeded random generators for property checks."""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations_with_replacement

from .diffalg import Poly, Var


def rng_for(seed) -> random.Random:
    return random.Random(seed)


def _coef(rng: random.Random) -> Fraction:
    c = 0
    while c == 0:
        c = Fraction(rng.randint(-4, 4), rng.choice([1, 1, 1, 2, 3]))
    return c


def random_diffpoly(rng: random.Random, ngens: int = 1, max_order: int = 2, max_deg: int = 3,
                    nterms: int = 3, constant: bool = True) -> Poly:
    out = Poly()
    for _ in range(nterms):
        deg = rng.randint(0 if constant else 1, max_deg)
        mono = Poly.const(_coef(rng))
        for _ in range(deg):
            mono = mono * Poly.var(Var("u", rng.randint(1, ngens), rng.randint(0, max_order)))
        out = out + mono
    return out


def random_lambda_mono(rng: random.Random, k: int, max_deg: int) -> Poly:
    out = Poly.const(1)
    for _ in range(rng.randint(0, max_deg)):
        out = out * Poly.var(Var("l", rng.randint(1, k)))
    return out


def random_cochain(rng, R, spec, k: int, lam_deg: int = 2, max_order: int = 1, max_deg: int = 2,
                   nterms: int = 2, basic: bool = False):
    from .conformal_calculus import ConformalCochain

    vals = {}
    for t in combinations_with_replacement(range(R.rank), k):
        v = Poly()
        for _ in range(nterms):
            lm = random_lambda_mono(rng, k, lam_deg) if k else Poly.const(1)
            v = v + lm * random_diffpoly(rng, spec.ngens, max_order, max_deg, 1)
        vals[t] = v
    return ConformalCochain(R, spec, k, vals, basic)


def random_chain(rng, R, spec, h: int, trust: int, max_order: int = 1, max_deg: int = 2,
                 y_deg: int = 1, ntuples: int = 2):
    """Chain generated by random gauges on a few random tuples."""
    from .conformal_calculus import ChainGauge, chain_expand

    if h == 0:
        return chain_expand(R, spec, [ChainGauge((), {(): Poly.const(_coef(rng))})], trust)
    gauges = []
    for _ in range(ntuples):
        t = tuple(rng.randrange(R.rank) for _ in range(h))
        psi = {}
        for _ in range(2):
            alpha = tuple(rng.randint(0, y_deg) for _ in range(h - 1))
            psi[alpha] = psi.get(alpha, Poly()) + random_diffpoly(rng, spec.ngens, max_order, max_deg, 1)
        gauges.append(ChainGauge(t, psi))
    return chain_expand(R, spec, gauges, trust)


def random_form(rng, ngens: int, k: int, max_order: int = 2, max_deg: int = 2, nterms: int = 2):
    from .varcalc import DeRhamForm

    terms = {}
    for _ in range(nterms):
        labels = tuple(Var("u", rng.randint(1, ngens), rng.randint(0, max_order)) for _ in range(k))
        terms[labels] = terms.get(labels, Poly()) + random_diffpoly(rng, ngens, max_order, max_deg, 1)
    return DeRhamForm(ngens, k, terms)
