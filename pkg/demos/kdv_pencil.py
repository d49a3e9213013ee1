"""Poisson checks for the two KdV operators and their pencil."""

from __future__ import annotations

from gerstcalc import varcalc as vc
from gerstcalc.parsing import parse_expr


def operator(*terms):
    return vc.DiffOperatorMatrix(1, {(0, 0): {n: parse_expr(p) for p, n in terms}})


gfz = operator(("1", 1))
magri = operator(("1", 3), ("2*u", 1), ("u'", 0))
print("H1 =", gfz)
print("H2 =", magri)

for name, H in [("H1", gfz), ("H2", magri)]:
    v = vc.check_poisson(H)
    print(f"{name}: Poisson = {v.poisson} (order {v.order})")

v = vc.check_compatible(gfz, magri)
print("pencil H2 + c H1 compatible:", v.poisson)

# a skew-adjoint operator that fails the Jacobi identity
bad = operator(("2*u'", 1), ("u''", 0))
v = vc.check_poisson(bad)
print("u'd + d u':", v.poisson)
print(" ", v.first_nonzero)

# and one that is not even skew-adjoint
try:
    vc.check_poisson(operator(("u", 1)))
except vc.SkewAdjointViolation as e:
    print("u d:", e)
