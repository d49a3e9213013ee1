"""From de Rham forms on jets to local operators and back."""

from __future__ import annotations

from gerstcalc import conformal_calculus as cc
from gerstcalc import varcalc as vc
from gerstcalc.parsing import parse_expr

F = vc.DeRhamForm
u = parse_expr("u")

w = F.function(1, u * u / 2)
print("d(u^2/2) =", vc.deRham_d(w))

# the Hamiltonian density u'^2/2 and its variational differential
S = vc.LocalOperator.from_form(F.function(1, parse_expr("u'^2/2")))
dS = vc.local_op_d(S)
print("dS =", dS)
print("dS on the field with characteristic u^2:", vc.eval_local(dS, vc.EvVectorField([u * u])))

# a chain over the zero-bracket algebra and its polyvector field
R, spec = vc.variational_setting(1)
X = cc.vector_chain(R, spec, [u], 3)
P = vc.Phi(X)
print("Phi(u (x) e^{x d} u) =", P)
print("evolutionary:", vc.is_evolutionary(P))

two = F.du(1, 1).wedge(F.du(1, 1, 1))
print("Psi(du ^ du') =", vc.Psi(two))
print("Psi(d/dx (u du ^ du')) is zero:", vc.Psi(vc.form_del(F.function(1, u).wedge(two))).is_zero())
