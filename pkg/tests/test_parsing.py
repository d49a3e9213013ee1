from __future__ import annotations

import pytest

from gerstcalc.diffalg import format_poly, u
from gerstcalc.errors import ExprSyntaxError, UnknownGenerator
from gerstcalc.parsing import parse_expr, z_resolver
from gerstcalc.samples import random_diffpoly, rng_for


def test_basic():
    assert parse_expr("u*u'") == u(1) * u(1, 1)
    assert parse_expr("u1(3)^2 - 1/2") == u(1, 3) ** 2 - parse_expr("1/2")
    assert parse_expr("v''") == u(2, 2)
    assert parse_expr("-(u - 2*v)/3") == (2 * u(2) - u(1)) / 3


def test_syntax_error_column():
    with pytest.raises(ExprSyntaxError) as e:
        parse_expr("u +* v")
    assert e.value.position == 4
    assert isinstance(e.value, SyntaxError)


@pytest.mark.parametrize("text", ["u +", "(u", "u^", "u/u", "u)"])
def test_rejects(text):
    with pytest.raises(ExprSyntaxError):
        parse_expr(text)


def test_unknown_generator():
    with pytest.raises(UnknownGenerator) as e:
        parse_expr("u + w")
    assert e.value.position == 5
    with pytest.raises(UnknownGenerator):
        parse_expr("u3", ngens=2)


def test_z_names():
    p = parse_expr("z^2 - 2*z", resolve=z_resolver(["z"]))
    assert len(p.terms) == 2


def test_roundtrip_random():
    rng = rng_for(11)
    for _ in range(100):
        f = random_diffpoly(rng, 3, 5, 4, 5)
        assert parse_expr(format_poly(f)) == f


def test_z_indexed_names():
    r = z_resolver(["x", "y"])
    assert parse_expr("x*y", resolve=r) == parse_expr("z1*z2", resolve=r)
