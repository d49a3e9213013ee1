from __future__ import annotations

import json

import pytest

from gerstcalc.cli import main


def run(capsys, *args):
    code = main(list(args))
    out = capsys.readouterr()
    return code, out.out.strip(), out.err.strip()


def write(tmp_path, name, data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def op(terms):
    return {"l": 1, "entries": [{"i": 1, "j": 1, "terms": [{"poly": p, "dpow": n} for p, n in terms]}]}


def test_vde_and_exact(capsys):
    assert run(capsys, "vde", "u*u''") == (0, "δ/δu1: 2*u1''", "")
    code, out, _ = run(capsys, "vde", "u*v'")
    assert code == 0 and out.splitlines() == ["δ/δu1: u2'", "δ/δu2: -u1'"]
    assert run(capsys, "exact", "u*u'") == (0, "total derivative: ∂(1/2*u1^2)", "")
    assert run(capsys, "exact", "u")[:2] == (1, "not a total derivative")


@pytest.mark.parametrize("args, code", [(("vde", "u +* v"), "E_SYNTAX"), (("exact", "w"), "E_GENERATOR"),
                                        (("vde", "u/u"), "E_SYNTAX")])
def test_input_errors(capsys, args, code):
    rc, _, err = run(capsys, *args)
    assert rc == 2 and err.startswith(f"error {code}:")


def test_dform(capsys, tmp_path):
    p = write(tmp_path, "w.json", {"ngens": 1, "degree": 0, "terms": [{"poly": "u^2/2", "du": []}]})
    assert run(capsys, "dform", p)[:2] == (0, "u1*du1")
    p = write(tmp_path, "w1.json", {"ngens": 1, "degree": 1, "terms": [{"poly": "u", "du": ["u'"]}]})
    assert run(capsys, "dform", p)[:2] == (0, "du1∧du1'")
    p = write(tmp_path, "w2.json", {"ngens": 1, "degree": 0, "terms": [{"poly": "u'^2/2", "du": []}]})
    assert run(capsys, "dform", p, "--variational")[:2] == (0, "u1'*du1'")


def test_schouten(capsys, tmp_path):
    X = write(tmp_path, "X.json", {"ngens": 1, "degree": 1, "terms": [{"poly": "1", "partials": ["u"]}]})
    Y = write(tmp_path, "Y.json", {"ngens": 1, "degree": 1, "terms": [{"poly": "u", "partials": ["u'"]}]})
    assert run(capsys, "schouten", X, Y)[:2] == (0, "∂/∂u1'")


def test_check_poisson(capsys, tmp_path):
    gfz = write(tmp_path, "gfz.json", op([("1", 1)]))
    vir = write(tmp_path, "vir.json", op([("1", 3), ("2*u", 1), ("u'", 0)]))
    bad = write(tmp_path, "bad.json", op([("2*u'", 1), ("u''", 0)]))
    ud = write(tmp_path, "ud.json", op([("u", 1)]))
    assert run(capsys, "check-poisson", gfz) == (0, "POISSON: yes", "")
    assert run(capsys, "check-poisson", vir, "--with", gfz)[:2] == (0, "COMPATIBLE: yes")
    code, out, _ = run(capsys, "check-poisson", bad)
    assert code == 1 and out.startswith("POISSON: no\nfirst nonzero coefficient:")
    code, out, _ = run(capsys, "check-poisson", ud)
    assert code == 1 and "not skew-adjoint at entry (1, 1)" in out
    code, _, err = run(capsys, "check-poisson", vir, "--order", "3")
    assert code == 2 and err.startswith("error E_ORDER")
    code, out, _ = run(capsys, "check-poisson", vir, "-v")
    assert code == 0 and "Jacobi obstruction: 0" in out


def test_lca_check(capsys, tmp_path):
    def table(w):
        return {"generators": ["L"], "brackets": [{"i": 1, "j": 1, "terms": [
            {"c": 1, "p": 0, "q": 1, "k": 1}, {"c": w, "p": 1, "q": 0, "k": 1}]}]}
    code, out, _ = run(capsys, "lca-check", write(tmp_path, "vir.json", table(2)))
    assert code == 0 and out.count("PASS") == 2
    code, out, _ = run(capsys, "lca-check", write(tmp_path, "bad.json", table(3)))
    assert code == 1 and "counterexample" in out
    code, out, _ = run(capsys, "lca-check", write(tmp_path, "vir2.json", table(2)), "--json")
    assert json.loads(out)[0]["fail_count"] == 0


def test_axioms_deterministic(capsys):
    a = run(capsys, "axioms", "probe", "--seed", "3", "--json")
    b = run(capsys, "axioms", "probe", "--seed", "3", "--json")
    assert a == b and a[0] == 0
    assert run(capsys, "axioms", "lca")[0] == 0


def test_bad_files(capsys, tmp_path):
    assert run(capsys, "dform", str(tmp_path / "nope.json"))[0] == 2
    p = tmp_path / "broken.json"
    p.write_text("{")
    code, _, err = run(capsys, "dform", str(p))
    assert code == 2 and "invalid JSON" in err
    code, _, err = run(capsys, "check-poisson", write(tmp_path, "x.json", {"entries": []}))
    assert code == 2 and err.startswith("error E_INPUT")
    assert run(capsys, "axioms", "nonsense")[0] == 2
