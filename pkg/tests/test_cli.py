import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from semihilbert import cli
from semihilbert.cli import format_matrix, main, parse_matrix, write_matrix_file
from semihilbert.truncation import example


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def one_json(text):
    lines = [l for l in text.splitlines() if l.strip()]
    assert len(lines) == 1
    return json.loads(lines[0])


@pytest.fixture
def files(tmp_path):
    paths = {}

    def put(name, M):
        p = tmp_path / f"{name}.json"
        write_matrix_file(p, M, name)
        paths[name] = str(p)

    e3 = example("ex3", 4)
    put("A3", e3.metric.A)
    put("T3", e3.op.T)
    put("A", np.diag([1.0, 0.0]))
    put("T", np.array([[3.0, 0.0], [5.0, 7.0]]))
    put("bad", np.array([[1.0, 1.0], [0.0, 0.0]]))
    put("I", np.eye(2))
    put("neg", np.diag([1.0, -1.0]))
    put("X", np.array([[0.0, 1.0], [0.0, 0.0]]))
    put("Xt", np.array([[0.0, 0.0], [1.0, 0.0]]))
    put("I3", np.eye(3))
    put("big", np.eye(3))
    return paths


# matrix files -----------------------------------------------------------


def test_round_trip_canonical(tmp_path):
    M = np.array([[1.5, -2j], [0.25 + 1e-17j, 3]])
    text = format_matrix(M, "m")
    parsed, name = parse_matrix(text)
    assert name == "m"
    assert np.array_equal(parsed, M)
    assert format_matrix(parsed, name) == text
    p = tmp_path / "m.json"
    write_matrix_file(p, M, "m")
    raw = p.read_bytes()
    A, nm, _ = cli.read_matrix_file(p)
    write_matrix_file(p, A, nm)
    assert p.read_bytes() == raw


@pytest.mark.parametrize("text", [
    "not json",
    "[1, 2]",
    '{"rows": 1, "cols": 1}',
    '{"rows": 2, "cols": 1, "data": [[[1, 0]]]}',
    '{"rows": 1, "cols": 2, "data": [[[1, 0]]]}',
    '{"rows": 1, "cols": 1, "data": [[[1]]]}',
    '{"rows": 1, "cols": 1, "data": [[["a", 0]]]}',
    '{"rows": 1, "cols": 1, "data": [[[NaN, 0]]]}',
    '{"rows": 1, "cols": 1, "data": [[[1, 0]]], "name": 3}',
    '{"rows": 0, "cols": 0, "data": []}',
])
def test_parse_errors(text):
    with pytest.raises(cli.InputError):
        parse_matrix(text)


# analyze ----------------------------------------------------------------


def test_analyze_ex3(capsys, files):
    code, out, _ = run(capsys, "analyze", "--metric", files["A3"], "--op", files["T3"])
    assert code == 0
    doc = one_json(out)
    r = doc["results"]
    assert r["norm_a"] == pytest.approx(2.0)
    assert r["member"] is True
    assert "r_A(T)" in r and "r_A(T_diamond)" in r
    assert r["numerical_radius_a"] == pytest.approx(2 * math.cos(math.pi / 5))
    for key in ("command", "inputs", "tolerances", "results", "residuals", "warnings", "version", "seed"):
        assert key in doc
    assert len(doc["inputs"]["metric"]["sha256"]) == 64


def test_analyze_identity_classical(capsys, files):
    code, out, _ = run(capsys, "analyze", "--metric", files["I"], "--op", files["X"])
    r = one_json(out)["results"]
    assert r["norm_a"] == pytest.approx(1.0)
    assert r["numerical_radius_a"] == pytest.approx(0.5, abs=1e-6)
    assert r["diamond"]["data"] == [[[0.0, 0.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]


def test_analyze_not_member(capsys, files):
    code, out, err = run(capsys, "analyze", "--metric", files["A"], "--op", files["bad"])
    assert code == 3
    assert out == ""
    e = json.loads(err)
    assert e["error"] == "NotAMember" and e["residual"] == pytest.approx(1.0)


def test_analyze_bad_metric(capsys, files):
    code, out, err = run(capsys, "analyze", "--metric", files["neg"], "--op", files["T"])
    assert code == 4 and out == ""
    assert json.loads(err)["error"] == "MetricError"


def test_parse_error_exit(capsys, files, tmp_path):
    p = tmp_path / "broken.json"
    p.write_text("{")
    code, out, err = run(capsys, "analyze", "--metric", str(p), "--op", files["T"])
    assert code == 2 and out == ""
    code, _, _ = run(capsys, "analyze", "--metric", str(tmp_path / "missing.json"), "--op", files["T"])
    assert code == 2
    code, _, _ = run(capsys, "analyze", "--metric", files["A"], "--op", files["I3"])
    assert code == 2


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        main(["analyze"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["nonsense"])
    assert info.value.code == 2


# spectrum ---------------------------------------------------------------


def test_spectrum_hand(capsys, files):
    code, out, _ = run(capsys, "spectrum", "--metric", files["A"], "--op", files["T"], "--gelfand", "5")
    r = one_json(out)["results"]
    assert code == 0
    assert [p["value"] for p in r["sigma_a"]] == [[3.0, 0.0]]
    assert r["max_formula"] == pytest.approx(3.0)
    assert r["attaining_radius"] == "both"
    assert len(r["gelfand"]) == 5


def test_spectrum_ex1(capsys, tmp_path):
    inst = example("ex1", 16)
    write_matrix_file(tmp_path / "A.json", inst.metric.A)
    write_matrix_file(tmp_path / "T.json", inst.op.T)
    code, out, _ = run(capsys, "spectrum", "--metric", str(tmp_path / "A.json"), "--op", str(tmp_path / "T.json"))
    r = one_json(out)["results"]
    assert r["sup_sigma"] == pytest.approx(1.0, abs=1e-9)
    assert r["r_A(T)"] == pytest.approx(1.0, abs=1e-9)


def test_spectrum_identity_classical(capsys, files, tmp_path):
    rng = np.random.default_rng(0)
    T = rng.standard_normal((3, 3))
    write_matrix_file(tmp_path / "T.json", T)
    code, out, _ = run(capsys, "spectrum", "--metric", files["I3"], "--op", str(tmp_path / "T.json"))
    r = one_json(out)["results"]
    got = np.sort_complex([complex(*p["value"]) for p in r["sigma_a"]])
    assert np.allclose(got, np.sort_complex(np.linalg.eigvals(T)))


def test_deterministic_reports(capsys, files):
    _, a, _ = run(capsys, "spectrum", "--metric", files["A3"], "--op", files["T3"])
    _, b, _ = run(capsys, "spectrum", "--metric", files["A3"], "--op", files["T3"])
    assert a == b


# harte ------------------------------------------------------------------


def test_harte_identity_pair(capsys, files):
    code, out, _ = run(capsys, "harte", "--metric", files["I"], "--ops", files["I"], files["I"], "--nmax", "6")
    r = one_json(out)["results"]
    assert code == 0
    assert all(e["estimate"] == pytest.approx(math.sqrt(2)) for e in r["radius_estimates"])
    assert r["sup_l2"] == pytest.approx(math.sqrt(2))


def test_harte_single_matches_spectrum(capsys, files):
    _, out, _ = run(capsys, "harte", "--metric", files["A"], "--ops", files["T"], "--nmax", "4")
    h = one_json(out)["results"]
    _, out, _ = run(capsys, "spectrum", "--metric", files["A"], "--op", files["T"])
    s = one_json(out)["results"]
    assert h["sup_l2"] == pytest.approx(s["sup_sigma"])
    assert h["radius_estimates"][0]["estimate"] == pytest.approx(3.0)


def test_harte_not_commuting(capsys, files):
    code, out, err = run(capsys, "harte", "--metric", files["I"], "--ops", files["X"], files["Xt"])
    assert code == 5 and out == ""
    assert json.loads(err)["error"] == "NotCommuting"


# example ----------------------------------------------------------------


def test_example_ex3(capsys):
    code, out, _ = run(capsys, "example", "--name", "ex3", "--truncate", "32", "--nmax", "16")
    r = one_json(out)["results"]
    assert code == 0
    assert all(abs(row["gelfand"] - 2.0) <= 1e-9 for row in r["rows"])
    assert r["annotations"]


def test_example_ex2(capsys):
    _, out, _ = run(capsys, "example", "--name", "ex2", "--truncate", "16", "--nmax", "4")
    t = one_json(out)["results"]["truncations"]["16"]
    assert t["sup_sigma"] == pytest.approx(2 ** -0.25, abs=1e-9)


def test_example_ex1_points_and_annotation(capsys):
    _, out, _ = run(capsys, "example", "--name", "ex1", "--truncate", "8", "--nmax", "4")
    doc = one_json(out)
    pts = sorted(p[0] for p in doc["results"]["truncations"]["8"]["sigma_a"])
    assert pts == pytest.approx([0.0, 1.0], abs=1e-12)
    assert any("truncation point" in w for w in doc["warnings"])


def test_example_csv(capsys, tmp_path):
    p = tmp_path / "t.csv"
    code, out, _ = run(capsys, "example", "--name", "ex3", "--truncate", "6", "8", "--nmax", "5", "--csv", str(p))
    assert code == 0
    rows = list(csv.reader(p.open()))
    assert rows[0] == ["N", "n", "gelfand", "sup_sigma", "thm319"]
    assert len(rows) == 11
    assert float(rows[1][2]) == 2.0


def test_example_bad_args(capsys):
    with pytest.raises(SystemExit) as info:
        main(["example", "--name", "ex7", "--truncate", "4"])
    assert info.value.code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "UsageError" and "usage" in err
    code, _, err = run(capsys, "example", "--name", "ex1", "--truncate", "2")
    assert code == 2 and json.loads(err)["error"] == "TooSmall"
    code, _, _ = run(capsys, "example", "--name", "ex1", "--truncate", "500")
    assert code == 2


# verify -----------------------------------------------------------------


def test_verify_scalar(capsys):
    code, out, _ = run(capsys, "verify", "--trials", "1", "--dim", "1", "--rank", "1")
    doc = one_json(out)
    assert code == 0 and doc["results"]["ok"]
    assert doc["seed"] == 42


def test_verify_forced_failure(capsys):
    code, out, _ = run(capsys, "verify", "--trials", "2", "--tol", "0")
    doc = one_json(out)
    assert code == 1
    assert doc["results"]["failures"]
    assert set(doc["tolerances"].values()) == {0.0}


def test_verify_rank_check(capsys):
    code, _, _ = run(capsys, "verify", "--dim", "2", "--rank", "3")
    assert code == 2


def test_env_default_tolerance(capsys, files, monkeypatch):
    monkeypatch.setenv("SHS_TOL_DEFAULT", "1e-3")
    _, out, _ = run(capsys, "analyze", "--metric", files["A"], "--op", files["T"])
    assert one_json(out)["tolerances"]["tol"] == 1e-3
    monkeypatch.setenv("SHS_TOL_DEFAULT", "abc")
    code, _, _ = run(capsys, "analyze", "--metric", files["A"], "--op", files["T"])
    assert code == 2


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "semihilbert", "analyze", "--metric", files["A"], "--op", files["bad"]],
                          capture_output=True, text=True)
    assert proc.returncode == 3
    assert proc.stdout == ""
    assert json.loads(proc.stderr)["error"] == "NotAMember"
