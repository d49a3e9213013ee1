"""Chevalley-Eilenberg cochains of sl2 acting on Q[z] by vector fields."""

from __future__ import annotations

from gerstcalc import lie
from gerstcalc.gerstenhaber import check_calculus_axioms

A = lie.sl2_on_line()
z = A.parse("z")
f = lie.LieCochain(A, 0, {(): z * z})
print("f =", f)
print("df =", lie.cochain_d(f))
print("ddf =", lie.cochain_d(lie.cochain_d(f)))

e, h = lie.chain(A, (0,)), lie.chain(A, (1,), z)
print("[e, z h] =", lie.chain_bracket(e, h))
print("L_e f =", lie.lie_derive(e, f))

calc = lie.build_lie_calculus(A)
rep = check_calculus_axioms(calc, lie.basis_chains(A, 2, 1), lie.basis_cochains(A, 2, 1))
for s in rep.summary().values():
    print(f"{s['identity']:10s} {s['pass_count']} passed, {s['fail_count']} failed")
