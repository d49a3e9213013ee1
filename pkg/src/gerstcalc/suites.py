"""Seeded property suites shared by the `axioms` command and the test-suite.

Each suite returns a `Report`; sample sizes default to the ones used by the
acceptance tests and can be scaled down for quick runs.
"""

from __future__ import annotations

from . import conformal as cf
from . import conformal_calculus as cc
from . import lie
from . import varcalc as vc
from .diffalg import (Poly, Var, antiderivative, is_total_derivative, quotient_equal,
                      total_derivative, variational_derivative)
from .gerstenhaber import (Report, adjoint_calculus, check_calculus_axioms,
                           check_epsilon_rule, check_gerstenhaber_axioms, check_morphism)
from .samples import random_chain, random_cochain, random_diffpoly, random_form, rng_for


def lie_settings():
    """(name, algebra, z-degree used for basis elements)."""
    return [
        ("r2/trivial", lie.trivial_algebra(lie.r2()), 0),
        ("r2/line", lie.r2_on_line(), 1),
        ("sl2/trivial", lie.trivial_algebra(lie.sl2()), 0),
        ("sl2/line", lie.sl2_on_line(), 1),
    ]


def conformal_settings():
    z1 = cf.zero_lca(1)
    vir = cf.virasoro()
    cur = cf.current_sl2()
    return [
        ("zero/free", z1, cf.free_action(z1)),
        ("vir/zero", vir, cf.zero_action(vir, 1)),
        ("vir/density", vir, cf.virasoro_density(1)),
        ("cur/zero", cur, cf.zero_action(cur, 1)),
    ]


def _merge(rep: Report, other: Report, prefix: str) -> None:
    for name, sample, ok, detail in other.records:
        rep.add(name, (prefix, sample), ok, detail)


def suite_d_squared(seed: int = 0, n_random: int = 100) -> Report:
    rep = Report()
    for name, A, zdeg in lie_settings():
        for n, c in enumerate(lie.basis_cochains(A, A.g.dim, zdeg)):
            rep.add("d-squared", (name, n), lie.cochain_d(lie.cochain_d(c)).is_zero())
    rng = rng_for(seed)
    R = cf.zero_lca(2)
    spec = cf.free_action(R)
    for n in range(n_random):
        k = n % 4
        c = random_cochain(rng, R, spec, k, lam_deg=3, max_order=2, max_deg=2)
        rep.add("d-squared", ("zero2/free", n), cc.cochain_d(cc.cochain_d(c)).is_zero())
    return rep


def suite_calculus(seed: int = 0, n_pairs: int = 50, trust: int = 8) -> Report:
    """Exhaustive on Lie bases, seeded pairs in the conformal and variational settings."""
    rep = Report()
    ids = ["iota-iota", "L-iota", "L-L", "cartan"]
    for name, A, zdeg in lie_settings():
        calc = lie.build_lie_calculus(A)
        chains = lie.basis_chains(A, A.g.dim, zdeg)
        forms = lie.basis_cochains(A, A.g.dim, zdeg)
        _merge(rep, check_calculus_axioms(calc, chains, forms, identities=ids), name)
    rng = rng_for(seed)
    settings = conformal_settings()
    per = -(-n_pairs // (len(settings) + 1))
    for name, R, spec in settings:
        calc = cc.build_conformal_calculus(R, spec)
        chains = [random_chain(rng, R, spec, h, trust) for h in (0, 1, 1, 2)]
        forms = [random_cochain(rng, R, spec, k, max_order=1) for k in (1, 2)]
        pairs = [(rng.randrange(len(chains)), rng.randrange(len(chains))) for _ in range(per)]
        _merge(rep, check_calculus_axioms(calc, chains, forms, pairs=pairs, identities=ids), name)
    R, spec = vc.variational_setting(1)
    calc = vc.build_variational_calculus()
    fields = [vc.Phi(random_chain(rng, R, spec, h, trust)) for h in (0, 1, 1, 2)]
    ops = [vc.LocalOperator.from_form(random_form(rng, 1, k)) for k in (1, 2)]
    pairs = [(rng.randrange(len(fields)), rng.randrange(len(fields)))
             for _ in range(n_pairs - per * len(settings))]
    _merge(rep, check_calculus_axioms(calc, fields, ops, pairs=pairs, identities=ids), "variational")
    return rep


def suite_gerstenhaber(seed: int = 0, n_triples: int = 30, trust: int = 7) -> Report:
    rep = Report()
    ids = ["skew", "jacobi", "left-leibniz"]
    for name, A, zdeg in lie_settings():
        chains = lie.basis_chains(A, min(A.g.dim, 3), zdeg)
        _merge(rep, check_gerstenhaber_axioms(lie.chain_wedge, lie.chain_bracket, chains,
                                              identities=ids), name)
    rng = rng_for(seed)
    settings = conformal_settings()
    per = -(-n_triples // len(settings))
    for name, R, spec in settings:
        chains = [random_chain(rng, R, spec, h, trust) for h in (0, 1, 1, 2, 2)]
        n = len(chains)
        tri = [(rng.randrange(n), rng.randrange(n), rng.randrange(n)) for _ in range(per)]
        _merge(rep, check_gerstenhaber_axioms(cc.chain_wedge, cc.chain_bracket, chains,
                                              triples=tri, identities=ids), name)
    return rep


def suite_epsilon(seed: int = 0, n_samples: int = 30, trust: int = 8) -> Report:
    """eps = 1 for the adjoint action, eps = 0 for calculi coming from complexes.

    n_samples seeded chain pairs per calculus.
    """
    rep = Report()
    rng = rng_for(seed)

    def pick(n):
        return [(rng.randrange(n), rng.randrange(n)) for _ in range(n_samples)]

    A = lie.sl2_on_line()
    chains = lie.basis_chains(A, 2, 1)
    forms = lie.basis_cochains(A, 3, 1)
    adj = adjoint_calculus(lie.chain_wedge, lie.chain_bracket)
    _merge(rep, check_epsilon_rule(adj, 1, chains, chains[:4], pick(len(chains))), "sl2/line adjoint")
    _merge(rep, check_epsilon_rule(lie.build_lie_calculus(A), 0, chains, forms[::7], pick(len(chains))),
           "sl2/line")
    name, R, spec = conformal_settings()[2]
    cch = [random_chain(rng, R, spec, h, trust) for h in (0, 1, 1, 2)]
    adj = adjoint_calculus(cc.chain_wedge, cc.chain_bracket)
    _merge(rep, check_epsilon_rule(adj, 1, cch, cch[:2], pick(len(cch))), f"{name} adjoint")
    forms = [random_cochain(rng, R, spec, k) for k in (1, 2)]
    _merge(rep, check_epsilon_rule(cc.build_conformal_calculus(R, spec), 0, cch, forms, pick(len(cch))), name)
    R, spec = vc.variational_setting(1)
    fields = [vc.Phi(random_chain(rng, R, spec, h, trust)) for h in (0, 1, 1, 2)]
    ops = [vc.LocalOperator.from_form(random_form(rng, 1, k)) for k in (1, 2)]
    _merge(rep, check_epsilon_rule(vc.build_variational_calculus(), 0, fields, ops, pick(len(fields))),
           "variational")
    return rep


def suite_morphism(seed: int = 0, n_pairs: int = 50, trust: int = 8) -> Report:
    """Psi d = d Psi, Psi iota_{Phi(a)} = iota_a Psi, Psi(d/dx w) = 0."""
    rep = Report()
    rng = rng_for(seed)
    for ngens in (1, 2):
        R, spec = vc.variational_setting(ngens)
        n = n_pairs // 2
        forms = [random_form(rng, ngens, rng.randint(0, 3)) for _ in range(n)]
        chains = [random_chain(rng, R, spec, rng.randint(0, min(2, w.degree)), trust) for w in forms]
        for a, (X, w) in enumerate(zip(chains, forms)):
            sub = check_morphism(vc.Phi, vc.Psi, vc.build_deRham_calculus(),
                                 cc.build_conformal_calculus(R, spec), [X], [w], gerst=False)
            _merge(rep, sub, (ngens, a))
            rep.add("psi-del", (ngens, a), vc.Psi(vc.form_del(w)).is_zero())
    return rep


def suite_euler(seed: int = 0, n_kernel: int = 200, n_exact: int = 100) -> Report:
    rep = Report()
    rng = rng_for(seed)
    for n in range(n_kernel):
        ngens = 1 + n % 2
        f = total_derivative(random_diffpoly(rng, ngens, 3, 3, 3))
        ok = all(variational_derivative(f, i).is_zero() for i in range(1, ngens + 1))
        rep.add("euler-kernel", n, ok)
    for n in range(n_exact):
        g = random_diffpoly(rng, 1 + n % 2, 3, 3, 3)
        f = total_derivative(g)
        h = antiderivative(f)
        ok = h is not None and total_derivative(h) == f and quotient_equal(f, total_derivative(h))
        ok = ok and is_total_derivative(f) and (h - g).max_order() < 0
        rep.add("exact-roundtrip", n, ok)
    return rep


def _op(ops: dict) -> vc.DiffOperatorMatrix:
    return vc.DiffOperatorMatrix(1, {(0, 0): ops})


def classical_operators() -> dict:
    u = Poly.var(Var("u", 1))
    du = total_derivative(u)
    return {
        "gfz": _op({1: Poly.const(1)}),
        "virasoro-magri": _op({3: Poly.const(1), 1: 2 * u, 0: du}),
        "u-d": _op({1: u}),
    }


def suite_poisson(seed: int = 0) -> Report:
    from .errors import SkewAdjointViolation

    rep = Report()
    ops = classical_operators()
    for name in ("gfz", "virasoro-magri"):
        v = vc.check_poisson(ops[name], 8)
        rep.add("poisson", name, v.poisson, v.first_nonzero or "")
    v = vc.check_compatible(ops["gfz"], ops["virasoro-magri"], 8)
    rep.add("compatible", ("gfz", "virasoro-magri"), v.poisson, v.first_nonzero or "")
    try:
        vc.check_poisson(ops["u-d"], 8)
        rep.add("skew-violation", "u-d", False, "accepted a non-skew-adjoint operator")
    except SkewAdjointViolation as e:
        rep.add("skew-violation", "u-d", e.entry == (1, 1), str(e))
    return rep


def suite_lca(seed: int = 0) -> Report:
    rep = Report()
    _merge(rep, cf.check_lca_axioms(cf.virasoro()), "virasoro")
    _merge(rep, cf.check_lca_axioms(cf.current_sl2()), "cur-sl2")
    bad = cf.virasoro(weight=3)
    mutated = cf.check_lca_axioms(bad)
    rep.add("mutated-fails", "(d+3lambda)L", not mutated.ok,
            str(mutated.failures()[0][:2]) if mutated.failures() else "")
    R = cf.virasoro()
    for m in range(6):
        for n in range(6):
            got = cf.ann_bracket(R, 0, m, 0, n)
            want = {(0, m + n - 1): m - n} if m != n and m + n >= 1 else {}
            rep.add("annihilation", (m, n), {k: v for k, v in got.items() if v} == want, str(got))
    return rep


def suite_probe(seed: int = 0, n_ops: int = 20) -> Report:
    rep = Report()
    rng = rng_for(seed)
    n = 0
    while n < n_ops:
        S = vc.LocalOperator.from_form(random_form(rng, 1, n % 3, max_order=2))
        if S.is_zero():
            continue
        X = vc.find_probe(S)
        rep.add("probe", (n, str(S)), X is not None, "" if X else "no probe found")
        n += 1
    return rep


SUITES = {
    "d-squared": suite_d_squared,
    "calculus": suite_calculus,
    "gerstenhaber": suite_gerstenhaber,
    "epsilon": suite_epsilon,
    "morphism": suite_morphism,
    "euler": suite_euler,
    "poisson": suite_poisson,
    "lca": suite_lca,
    "probe": suite_probe,
}
