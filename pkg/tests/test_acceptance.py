"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run directly (python3 tests/test_acceptance.py) or through pytest; in the
latter case the lines are repeated in the terminal summary.
"""

from __future__ import annotations

import subprocess
import sys
import time
from pathlib import Path

import pytest

from gerstcalc import varcalc as vc
from gerstcalc.diffalg import format_poly
from gerstcalc.parsing import parse_expr
from gerstcalc.samples import random_diffpoly, rng_for
from gerstcalc.suites import (classical_operators, suite_calculus, suite_d_squared, suite_epsilon,
                              suite_euler, suite_gerstenhaber, suite_lca, suite_morphism, suite_probe)

try:
    from conftest import ACCEPTANCE
except ImportError:  # run as a script outside pytest
    ACCEPTANCE = {}


def _record(n: int, label: str, ok: bool, detail: str = "") -> None:
    ACCEPTANCE[n] = (ok, label)
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {label}"
    print(line + (f" ({detail})" if detail and not ok else ""))
    assert ok, detail or line


def _suite(n: int, label: str, fn, limit: float | None = None, **kw):
    t0 = time.perf_counter()
    rep = fn(seed=0, **kw)
    dt = time.perf_counter() - t0
    detail = "; ".join(f"{f[0]} {f[1]}: {f[3]}" for f in rep.failures()[:3])
    ok = rep.ok
    if limit is not None and dt > limit:
        ok, detail = False, f"took {dt:.1f}s, limit {limit}s"
    _record(n, f"{label} [{len(rep.records)} checks, {dt:.1f}s]", ok, detail)
    return rep


def test_criterion_01_d_squared():
    _suite(1, "d^2 = 0 on Lie bases and 100 conformal cochains", suite_d_squared, 60)


def test_criterion_02_calculus_axioms():
    _suite(2, "calculus identities, Lie exhaustive + 50 conformal/variational pairs",
           suite_calculus, 120)


def test_criterion_03_gerstenhaber():
    _suite(3, "Gerstenhaber identities on Lie chains and conformal triples", suite_gerstenhaber)


def test_criterion_04_epsilon_rule():
    _suite(4, "eps-Leibniz rule (eps=1 adjoint, eps=0 complex-derived)", suite_epsilon)


def test_criterion_05_morphism():
    _suite(5, "Psi d = d Psi, Psi iota_Phi(a) = iota_a Psi, Psi(del w) = 0", suite_morphism)


def test_criterion_06_euler_kernel():
    _suite(6, "Euler operator kills total derivatives, antiderivative round-trip", suite_euler)


def test_criterion_07_poisson():
    from gerstcalc.errors import SkewAdjointViolation

    t0 = time.perf_counter()
    ops = classical_operators()
    gfz = vc.check_poisson(ops["gfz"], 8)
    vir = vc.check_poisson(ops["virasoro-magri"], 8)
    comp = vc.check_compatible(ops["gfz"], ops["virasoro-magri"], 8)
    try:
        vc.check_poisson(ops["u-d"], 8)
        skew = False
    except SkewAdjointViolation as e:
        skew = e.entry == (1, 1)
    zero = all(not v.obstruction for v in (gfz, vir, comp))
    dt = time.perf_counter() - t0
    ok = gfz.poisson and vir.poisson and comp.poisson and skew and zero and dt <= 120
    _record(7, f"Poisson verdicts for d, d^3+2ud+u', their pencil, u d [{dt:.1f}s]", ok,
            f"gfz={gfz.poisson} vir={vir.poisson} compat={comp.poisson} skew-violation={skew}")


def test_criterion_08_lca():
    _suite(8, "Vir and Cur(sl2) axioms, mutated table rejected, annihilation bracket", suite_lca)


def test_criterion_09_probe():
    _suite(9, "probe finds a witness for 20 random local operators", suite_probe)


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "gerstcalc", *args], capture_output=True, text=True)


def test_criterion_10_cli(tmp_path: Path):
    rng = rng_for(0)
    bad = []
    for _ in range(200):
        f = random_diffpoly(rng, rng.randint(1, 3), 4, 4, rng.randint(1, 5))
        text = format_poly(f)
        if parse_expr(text) != f or format_poly(parse_expr(text)) != text:
            bad.append(text)
    gfz = tmp_path / "gfz.json"
    gfz.write_text('{"l": 1, "entries": [{"i": 1, "j": 1, "terms": [{"poly": "1", "dpow": 1}]}]}')
    runs = [
        (("vde", "u*u''"), 0, "δ/δu1: 2*u1''"),
        (("check-poisson", str(gfz)), 0, "POISSON: yes"),
        (("exact", "u"), 1, "not a total derivative"),
    ]
    for args, code, out in runs:
        r = _cli(*args)
        if r.returncode != code or r.stdout.strip() != out:
            bad.append(f"{args}: exit {r.returncode}, stdout {r.stdout.strip()!r}")
    r = _cli("vde", "u +* v")
    if r.returncode != 2 or "E_SYNTAX" not in r.stderr:
        bad.append(f"syntax error: exit {r.returncode}")
    _record(10, "parser round-trip on 200 expressions and documented CLI exit codes", not bad,
            "; ".join(bad[:3]))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
