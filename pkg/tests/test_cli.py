"""Problem documents, report payloads, exit-code mapping, determinism."""
import json
import math

import pytest

from cornerpencil import builtin_problem
from cornerpencil.cli import parse_problem_file, run, serialize_problem


def run_capture(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# ---------------------------------------------------------------------------
# document parsing


@pytest.mark.parametrize("name,params", [
    ("periodic_laplace", None),
    ("dirichlet_laplace", {"d": math.pi}),
    ("ex21_sector", {"d": math.pi / 2, "alpha1": 0.5, "alpha2": 0.5}),
    ("ex6_quarter", {"alpha1": 0.3, "alpha2": 0.4}),
    ("ex11_orbit4", {"alpha1": 0.3, "alpha2": 0.4, "beta1": 0.1, "beta2": 0.2}),
])
def test_serialize_parse_round_trip(name, params):
    p = builtin_problem(name, params)
    assert parse_problem_file(serialize_problem(p)) == p


def test_parse_rejects_bad_documents():
    with pytest.raises(ValueError, match="not valid JSON"):
        parse_problem_file("{nope")
    with pytest.raises(ValueError, match="root must be an object"):
        parse_problem_file("[1, 2]")
    with pytest.raises(ValueError, match="'builtin', 'pencil' or 'sector'"):
        parse_problem_file("{}")


def test_parse_surfaces_validation_diagnostics():
    p = builtin_problem("ex21_sector",
                        {"d": math.pi / 2, "alpha1": 0.5, "alpha2": 0.5})
    doc = json.loads(serialize_problem(p))
    doc["pencil"]["rows"][0]["terms"][1]["chi"] = 0.0
    with pytest.raises(ValueError, match="chi must be > 0"):
        parse_problem_file(json.dumps(doc))


def test_parse_sector_unknown_evaluator():
    doc = {"sector": {"d": 1.0, "sides": [{"alpha": 0.5, "shift": 0.5},
                                          {"alpha": 0.5, "shift": 0.5}],
                      "rhs": "bogus", "dirichlet": "zero",
                      "grid": {"n_r": 8, "n_a": 9}}}
    with pytest.raises(ValueError, match="unknown evaluator"):
        parse_problem_file(json.dumps(doc))


def test_shipped_problem_file_matches_builtin(problems_dir):
    text = (problems_dir / "ex21.json").read_text()
    want = builtin_problem("ex21_sector",
                           {"d": math.pi / 2, "alpha1": 0.5, "alpha2": 0.5})
    assert parse_problem_file(text) == want


# ---------------------------------------------------------------------------
# verbs and exit codes


def test_eigs_report_shape(problems_dir, capsys):
    code, out, _ = run_capture(
        ["eigs", "--problem", str(problems_dir / "dirichlet_pi.json"),
         "--rect", "-0.5", "0.5", "-2.5", "-0.5"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["verb"] == "eigs"
    assert rep["payload"]["count"] == 2
    assert rep["payload"]["eigenvalues"] == [[0.0, -2.0], [0.0, -1.0]]
    assert set(rep) == {"verb", "input_digest", "version", "seed",
                        "discretization", "payload"}


def test_usage_error_exit_1(problems_dir, capsys):
    code, _, err = run_capture(["eigs", "--problem", "missing.json",
                                "--rect", "0", "1", "0", "1"], capsys)
    assert code == 1 and "no such file" in err
    code, _, err = run_capture(["eigs", "--rect", "0", "1", "0", "1"], capsys)
    assert code == 1
    code, _, err = run_capture(
        ["verdict", "--problem", str(problems_dir / "sector_ex21.json"),
         "--a", "1", "--l", "0"], capsys)
    assert code == 1 and "pencil problem" in err


def test_domain_error_exit_2(problems_dir, capsys):
    code, _, err = run_capture(
        ["jordan", "--problem", str(problems_dir / "periodic.json"),
         "--lam", "5", "5"], capsys)
    assert code == 2 and "NotAnEigenvalue" in err


def test_report_is_byte_stable(problems_dir, capsys):
    argv = ["strip-check", "--problem", str(problems_dir / "periodic.json"),
            "--h2", "-1.5", "--h1", "-0.5"]
    _, out1, _ = run_capture(argv, capsys)
    _, out2, _ = run_capture(argv, capsys)
    assert out1 == out2


def test_digest_tracks_inputs(problems_dir, capsys):
    base = ["verdict", "--problem", str(problems_dir / "ex21.json"),
            "--a", "1", "--l", "0"]
    _, out1, _ = run_capture(base, capsys)
    _, out2, _ = run_capture(base[:-1] + ["1"], capsys)
    d1, d2 = (json.loads(o)["input_digest"] for o in (out1, out2))
    assert d1 != d2


def test_out_file_and_csv_sidecar(problems_dir, tmp_path, capsys):
    out = tmp_path / "rep.json"
    csv = tmp_path / "rings.csv"
    code, stdout, _ = run_capture(
        ["sector-solve", "--problem", str(problems_dir / "sector_ex21.json"),
         "--out", str(out), "--csv", str(csv)], capsys)
    assert code == 0 and stdout == ""
    rep = json.loads(out.read_text())
    assert rep["payload"]["stats"]["method"] == "splu"
    lines = csv.read_text().strip().splitlines()
    assert lines[0] == "r,l2_ring_norm"
    assert len(lines) == 1 + rep["discretization"]["n_r"]


def test_convergence_verb_needs_no_problem(capsys):
    code, out, _ = run_capture(
        ["convergence", "--case", "zero", "--base", "16", "17",
         "--levels", "3"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert rep["payload"]["l2_order"] is None
    assert "not-applicable" in rep["payload"]["note"]


def test_asym_evaluates_point(problems_dir, capsys):
    code, out, _ = run_capture(
        ["asym", "--problem", str(problems_dir / "periodic.json"),
         "--lam", "0", "-1", "--at", "2.0", "0.7853981633974483"], capsys)
    assert code == 0
    rep = json.loads(out)
    assert len(rep["payload"]["functions"]) == 2
    for f in rep["payload"]["functions"]:
        assert "value_at" in f
