import csv
import io
from fractions import Fraction

import pytest

from smc.cli import main
from smc.core import check_stability, load_instance, load_matching, utilities
from smc.decompose import load_bvn
from smc.lp import certificate_holds, load_certificate

CNF = "p cnf 3 4\n1 2 3 0\n-1 -2 -3 0\n1 -2 3 0\n-1 2 -3 0\n"


def run(*argv):
    try:
        return main([str(a) for a in argv])
    except SystemExit as exc:  # argparse usage errors
        return exc.code


def report(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line and not line.startswith("violation"))


@pytest.fixture
def fig1(tmp_path):
    path = tmp_path / "fig1.inst"
    assert run("gen", "--family", "fig1", "--out", path) == 0
    return path


def test_solve_exact_thresh(fig1, tmp_path, capsys):
    out = tmp_path / "m.txt"
    assert run("solve", "--in", fig1, "--method", "exact-thresh", "--out", out, "--no-time") == 0
    rep = report(capsys.readouterr().out)
    assert rep["welfare"] == "15/2" and rep["stable"] == "true"
    inst, mu = load_instance(fig1), load_matching(out)
    assert utilities(inst, mu).welfare == Fraction(15, 2)
    assert certificate_holds(inst, mu, load_certificate((tmp_path / "m.txt.cert").read_text()))


@pytest.mark.parametrize("method", ["exact-milp", "heavy-light", "half-stable"])
def test_other_methods(fig1, method, capsys):
    assert run("solve", "--in", fig1, "--method", method, "--no-time") == 0
    assert report(capsys.readouterr().out)["method"] == method


def test_blend_needs_eps(fig1, capsys):
    assert run("solve", "--in", fig1, "--method", "blend") == 1
    assert run("solve", "--in", fig1, "--method", "blend", "--eps", "1/2", "--no-time") == 0
    assert report(capsys.readouterr().out)["welfare"] == "15/2"


def test_binary_method_rejects_general_instance(fig1, capsys):
    assert run("solve", "--in", fig1, "--method", "binary") == 1
    assert "NotBinary" in capsys.readouterr().err


def test_cap_exceeded_exit_code(tmp_path):
    path = tmp_path / "big.inst"
    assert run("gen", "--family", "random", "--n", 7, "--seed", 1, "--out", path) == 0
    assert run("solve", "--in", path, "--method", "exact-thresh") == 2
    assert run("solve", "--in", path, "--method", "exact-thresh", "--cap", 3) == 2


def test_check_notions(fig1, tmp_path, capsys):
    witness = f"{fig1}.witness"
    assert run("check", "--in", fig1, "--matching", witness, "--notion", "stable") == 0
    assert run("check", "--in", fig1, "--matching", witness, "--notion", "eps-stable", "--eps", "1/4") == 0
    capsys.readouterr()
    assert run("check", "--in", fig1, "--matching", witness, "--notion", "fractional") == 3
    out = capsys.readouterr().out
    assert "holds=false" in out and "violation=(m1,w3) value=1/2" in out
    assert run("check", "--in", fig1, "--matching", witness, "--notion", "expost") == 3


def test_strong_violation_on_appendix_b(tmp_path, capsys):
    path = tmp_path / "b.inst"
    run("gen", "--family", "appendixB", "--out", path)
    assert run("check", "--in", path, "--matching", f"{path}.witness", "--notion", "strong") == 3
    assert "violation" in capsys.readouterr().out


@pytest.mark.parametrize("body", ["matching v1\nn=3\n1 0\n", "matching v1\nn=3\n2 0 0\n0 0 0\n0 0 0\n", "garbage"])
def test_malformed_matching(fig1, tmp_path, body):
    bad = tmp_path / "bad.txt"
    bad.write_text(body)
    assert run("check", "--in", fig1, "--matching", bad, "--notion", "stable") == 1


def test_missing_file_and_bad_eps(fig1):
    assert run("check", "--in", fig1, "--matching", "nope", "--notion", "stable") == 1
    assert run("solve", "--in", fig1, "--method", "exact-thresh", "--eps", "2") == 1


def test_usage_errors():
    assert run("solve", "--method", "exact-thresh") == 1
    assert run("frobnicate") == 1


def test_decompose_round_trip(tmp_path):
    path = tmp_path / "b.inst"
    out = tmp_path / "b.bvn"
    run("gen", "--family", "appendixB", "--out", path)
    assert run("decompose", "--matching", f"{path}.witness", "--out", out) == 0
    bvn = load_bvn(out.read_text())
    assert len(bvn) == 3
    assert bvn.reconstruct(3) == load_matching(tmp_path / "b.inst.witness")


def test_decompose_with_padding(fig1, tmp_path, capsys):
    half = tmp_path / "h.txt"
    half.write_text("matching v1\nn=3\n1/2 0 0\n0 1/2 0\n0 0 0\n")
    assert run("decompose", "--matching", half, "--in", fig1, "--pad") == 0
    assert "lambda" in capsys.readouterr().out


@pytest.mark.parametrize("args", [
    ("--family", "gap", "--alpha", "3", "--k", "3"),
    ("--family", "nonconvex"),
    ("--family", "unstable-support", "--alpha", "3"),
    ("--family", "support-lb", "--n", "5", "--rho", "1"),
    ("--family", "2x2"),
])
def test_gen_named_families(tmp_path, args):
    path = tmp_path / "g.inst"
    assert run("gen", *args, "--out", path) == 0
    inst = load_instance(path)
    witness = tmp_path / "g.inst.witness"
    if witness.exists():
        assert check_stability(inst, load_matching(witness)).stable


def test_gen_random_is_seeded(capsys):
    run("gen", "--family", "random", "--n", 4, "--seed", 5)
    first = capsys.readouterr().out
    run("gen", "--family", "random", "--n", 4, "--seed", 5)
    assert capsys.readouterr().out == first


def test_reduce_with_assignment(tmp_path, capsys):
    cnf = tmp_path / "f.cnf"
    cnf.write_text(CNF)
    out = tmp_path / "r.inst"
    assert run("reduce", "--cnf", cnf, "--variant", "thm6", "--alpha", 3, "--k", 2, "--assignment", "TFF", "--out", out) == 0
    rep = report(capsys.readouterr().out)
    assert rep["n"] == "39" and rep["witness_stable"] == "true"
    inst = load_instance(out)
    assert check_stability(inst, load_matching(tmp_path / "r.inst.witness")).stable
    assert (tmp_path / "r.inst.bindings").read_text().startswith("bindings v1")


def test_reduce_rejects_unsatisfying_assignment(tmp_path):
    cnf = tmp_path / "f.cnf"
    cnf.write_text(CNF)
    assert run("reduce", "--cnf", cnf, "--variant", "thm6", "--alpha", 3, "--k", 2, "--assignment", "TTT") == 1


def test_reduce_appc(tmp_path, capsys):
    cnf = tmp_path / "f.cnf"
    cnf.write_text(CNF)
    out = tmp_path / "c.inst"
    assert run("reduce", "--cnf", cnf, "--variant", "appC", "--eps", "1/40", "--delta", "1", "--assignment", "100", "--out", out) == 0
    rep = report(capsys.readouterr().out)
    assert rep["separated"] == "true" and rep["witness_stable"] == "true"


def test_reduce_rejects_non_2p2n(tmp_path):
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 3 4\n1 2 3 0\n1 -2 -3 0\n1 -2 3 0\n-1 2 -3 0\n")
    assert run("reduce", "--cnf", cnf, "--variant", "thm6", "--alpha", 3, "--k", 2) == 1


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bench_random_deterministic(capsys):
    assert run("bench", "--suite", "random", "--count", 4, "--seed", 3, "--no-time") == 0
    first = capsys.readouterr().out
    assert run("bench", "--suite", "random", "--count", 4, "--seed", 3, "--no-time") == 0
    assert capsys.readouterr().out == first
    rows = _rows(first)
    assert list(rows[0]) == ["instance", "method", "welfare", "ratio_vs_oracle", "checks_pass", "time_us"]
    assert all(r["checks_pass"] == "true" and r["time_us"] == "" for r in rows)


def test_bench_paper_tables(tmp_path):
    out = tmp_path / "t.csv"
    assert run("bench", "--suite", "paper-tables", "--out", out) == 0
    rows = _rows(out.read_text())
    assert rows and all(r["checks_pass"] == "true" for r in rows)
    assert all(r["time_us"].isdigit() for r in rows)
