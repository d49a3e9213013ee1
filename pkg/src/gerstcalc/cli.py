"""Command-line front end.

Exit codes: 0 success or positive verdict, 1 negative verdict, 2 input error.
Errors are written to stderr as ``error E_CODE: message``.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import conformal as cf
from . import varcalc as vc
from .diffalg import antiderivative, format_poly, generators, variational_derivative
from .errors import CalcError, SkewAdjointViolation
from .parsing import parse_expr
from .suites import SUITES


class InputError(Exception):
    code = "E_INPUT"


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON ({e.msg} at line {e.lineno} column {e.colno})") from None


def cmd_vde(args) -> int:
    f = parse_expr(args.expr, ngens=args.ngens)
    n = args.ngens or max(generators(f), default=1)
    for i in range(1, n + 1):
        print(f"δ/δu{i}: {format_poly(variational_derivative(f, i))}")
    return 0


def cmd_exact(args) -> int:
    f = parse_expr(args.expr, ngens=args.ngens)
    h = antiderivative(f)
    if h is None:
        print("not a total derivative")
        return 1
    print(f"total derivative: ∂({format_poly(h)})")
    return 0


def cmd_dform(args) -> int:
    w = vc.form_from_json(_load(args.json))
    if args.variational:
        S = vc.local_op_d(vc.LocalOperator.from_form(w))
        print(S)
    else:
        print(vc.deRham_d(w))
    return 0


def cmd_schouten(args) -> int:
    X = vc.polyvector_from_json(_load(args.json1))
    Y = vc.polyvector_from_json(_load(args.json2))
    print(vc.polyvector_schouten(X, Y))
    return 0


def cmd_check_poisson(args) -> int:
    H = vc.operator_from_json(_load(args.json))
    try:
        if args.with_:
            H2 = vc.operator_from_json(_load(args.with_))
            v = vc.check_compatible(H, H2, args.order)
            label = "COMPATIBLE"
        else:
            v = vc.check_poisson(H, args.order)
            label = "POISSON"
    except SkewAdjointViolation as e:
        print(f"{'COMPATIBLE' if args.with_ else 'POISSON'}: no")
        print(f"skew-adjoint: no, {e}")
        return 1
    print(f"{label}: {'yes' if v.poisson else 'no'}")
    if args.verbose:
        print(v.report())
    elif v.first_nonzero:
        print(f"first nonzero coefficient: {v.first_nonzero}")
    return 0 if v.poisson else 1


def cmd_lca_check(args) -> int:
    R = cf.from_json(_load(args.json))
    rep = cf.check_lca_axioms(R)
    return _emit(rep, args.json_out, "LCA")


def cmd_axioms(args) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        rep = SUITES[name](seed=args.seed)
        ok &= _emit(rep, args.json_out, name) == 0
    return 0 if ok else 1


def _emit(rep, as_json: bool, label: str) -> int:
    if as_json:
        print(rep.to_json())
    else:
        for s in rep.summary().values():
            line = f"{'PASS' if not s['fail_count'] else 'FAIL'} {label} {s['identity']}: " \
                   f"{s['pass_count']} passed, {s['fail_count']} failed"
            print(line)
            cx = s["first_counterexample"]
            if cx:
                print(f"  counterexample {cx['sample']}: {cx['detail']}")
    return 0 if rep.ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gerstcalc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("vde", help="variational derivative with respect to each generator")
    s.add_argument("expr")
    s.add_argument("--ngens", type=int)
    s.set_defaults(fn=cmd_vde)

    s = sub.add_parser("exact", help="decide whether an expression is a total derivative")
    s.add_argument("expr")
    s.add_argument("--ngens", type=int)
    s.set_defaults(fn=cmd_exact)

    s = sub.add_parser("dform", help="de Rham differential of a form (or variational with --variational)")
    s.add_argument("json")
    s.add_argument("--variational", action="store_true")
    s.set_defaults(fn=cmd_dform)

    s = sub.add_parser("schouten", help="Schouten bracket of two polyvector fields")
    s.add_argument("json1")
    s.add_argument("json2")
    s.set_defaults(fn=cmd_schouten)

    s = sub.add_parser("check-poisson", help="Poisson test of a matrix differential operator")
    s.add_argument("json")
    s.add_argument("--order", type=int)
    s.add_argument("--with", dest="with_", metavar="JSON", help="test compatibility with a second operator")
    s.add_argument("-v", "--verbose", action="store_true")
    s.set_defaults(fn=cmd_check_poisson)

    s = sub.add_parser("lca-check", help="skewcommutativity and Jacobi of a lambda-bracket table")
    s.add_argument("json")
    s.add_argument("--json", dest="json_out", action="store_true")
    s.set_defaults(fn=cmd_lca_check)

    s = sub.add_parser("axioms", help="run a seeded property suite")
    s.add_argument("suite", choices=[*SUITES, "all"])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--json", dest="json_out", action="store_true")
    s.set_defaults(fn=cmd_axioms)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.fn(args)
    except (CalcError, InputError) as e:
        print(f"error {e.code}: {e}", file=sys.stderr)
        return 2
    except (KeyError, TypeError, ValueError) as e:
        print(f"error E_INPUT: malformed input ({type(e).__name__}: {e})", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
