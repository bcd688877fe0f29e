import json
import subprocess
import sys

import mpmath
import pytest

from discspaces.bounds import c_of_r
from discspaces.cli import main
from discspaces.construction import dump_witness, load_witness


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def wfile(tmp_path, witness3):
    path = tmp_path / "w.json"
    path.write_text(dump_witness(witness3))
    return str(path)


def test_construct_then_verify(tmp_path, capsys):
    out = str(tmp_path / "w.json")
    code, stdout, err = run(capsys, "construct", "--steps", "3", "--nu-schedule", "1/k", "--out", out)
    assert code == 0 and json.loads(stdout)["steps"] == 3 and "step 3" in err
    code, stdout, _ = run(capsys, "verify", "--witness", out)
    assert code == 0 and json.loads(stdout)["passed"] is True


def test_construct_to_stdout_is_the_witness(capsys, witness3):
    code, stdout, _ = run(capsys, "construct", "--steps", "3")
    assert code == 0 and load_witness(stdout) == witness3


def test_verify_corrupted_witness(tmp_path, capsys, wfile):
    data = json.loads(open(wfile).read())
    data["steps"][1]["c"] = data["steps"][0]["c"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, stdout, err = run(capsys, "verify", "--witness", str(bad))
    assert code == 3
    report = json.loads(stdout)
    assert report["passed"] is False
    assert "step 2 coefficient-growth" in err


def test_verify_margin_csv(tmp_path, capsys, wfile):
    csv = tmp_path / "m.csv"
    code, _, _ = run(capsys, "verify", "--witness", wfile, "--csv", str(csv))
    rows = csv.read_text().splitlines()
    assert code == 0 and rows[0] == "k,inequality,margin"
    assert all(float(r.split(",")[2]) > 0 for r in rows[1:])


def test_cr_bound_matches_library(capsys):
    code, stdout, _ = run(capsys, "cr-bound", "--p", "3", "--r", "0.5")
    assert code == 0
    data = json.loads(stdout)
    with mpmath.workprec(256):
        assert abs(mpmath.mpf(data["value"]) - c_of_r(3, 0.5)) < mpmath.mpf(10) ** -25
    assert data["r"] == {"gap": "0.5"}


def test_kernel_bound(capsys):
    code, stdout, _ = run(capsys, "kernel-bound", "--nu", "0", "--gap", "0.5")
    assert code == 0 and float(json.loads(stdout)["value"]) == pytest.approx((4 / 3) ** 0.5, abs=1e-12)


@pytest.mark.parametrize("argv, value", [
    (["--space", "s-nu", "--nu=-1/2", "--coeffs", "2,0,0,0"], 2.0),
    (["--space", "bergman", "--p", "2", "--alpha", "0", "--coeffs", "0,1"], 0.5 ** 0.5),
    (["--space", "dirichlet", "--p", "3", "--coeffs", "0,1"], 1.0),
    (["--space", "hardy", "--p", "2", "--gap", "0.5", "--coeffs", "1,1"], 1.25 ** 0.5),
])
def test_norm(capsys, argv, value):
    code, stdout, _ = run(capsys, "norm", *argv)
    assert code == 0 and float(json.loads(stdout)["value"]) == pytest.approx(value, abs=1e-9)


def test_radial_profile_outputs(tmp_path, capsys, wfile, witness3):
    prof, mins = tmp_path / "p.csv", tmp_path / "min.csv"
    code, stdout, _ = run(capsys, "radial-profile", "--witness", wfile, "--step", "2", "--grid", "256",
                          "--csv", str(prof), "--min-csv", str(mins))
    data = json.loads(stdout)
    assert code == 0 and float(data["min"]) >= float(data["lower_bound"]) > 2
    lines = prof.read_text().splitlines()
    assert lines[0] == "theta,modulus" and len(lines) == 257
    rows = mins.read_text().splitlines()
    assert rows[0] == "r_gap,min_modulus" and len(rows) == 4
    assert [float(r.split(",")[1]) >= k for k, r in enumerate(rows[1:], start=1)] == [True] * 3


def test_membership(capsys, wfile):
    code, stdout, _ = run(capsys, "membership", "--witness", wfile, "--nu", "1", "--nu", "1/2")
    recs = json.loads(stdout)["membership"]
    assert code == 0 and [r["tail"] for r in recs] == ["0.5", "0.25"]


def test_membership_not_applicable(capsys, wfile):
    code, stdout, _ = run(capsys, "membership", "--witness", wfile, "--nu", "1/3")
    assert code == 3 and json.loads(stdout)["error"] == "NotApplicableError"


def test_dump_and_load_are_byte_identical(tmp_path, capsys, wfile):
    copy = tmp_path / "copy.json"
    assert run(capsys, "dump", "--witness", wfile, "--out", str(copy))[0] == 0
    assert copy.read_bytes() == open(wfile, "rb").read()
    code, stdout, _ = run(capsys, "load", "--witness", str(copy))
    assert code == 0 and stdout == open(wfile).read()


def test_baire_a_small(capsys, wfile):
    argv = ["baire-a", "--witness", wfile, "--nu=-1/2", "--n-range", "0-1", "--k-range", "1",
            "--grid", "256", "--samples", "2", "--seed", "3"]
    code, first, _ = run(capsys, *argv)
    assert code == 0 and json.loads(first)["passed"]
    assert run(capsys, *argv)[1] == first


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["construct", "--bogus"],
    ["kernel-bound", "--nu", "0", "--gap", "2"],
    ["kernel-bound", "--nu", "x", "--gap", "0.5"],
    ["norm", "--space", "hardy", "--p", "2", "--coeffs", "1"],
    ["norm", "--space", "dirichlet", "--p", "2", "--alpha", "5", "--coeffs", "1"],
    ["construct", "--nu-schedule", "k"],
    ["verify", "--witness", "/nonexistent/w.json"],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_config_supplies_defaults(tmp_path, capsys, witness3):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"steps": 2, "nu_schedule": "1/k^2"}))
    code, stdout, _ = run(capsys, "--config", str(conf), "construct", "--steps", "3")
    w = load_witness(stdout)
    assert code == 0 and len(w.steps) == 3 and w.config["nu_schedule"] == "1/k^2"
    conf.write_text(json.dumps({"unknown_key": 1}))
    assert run(capsys, "--config", str(conf), "construct")[0] == 2


def test_precision_from_environment(monkeypatch, capsys, wfile):
    monkeypatch.setenv("DISCSPACES_PRECISION", "160")
    code, stdout, _ = run(capsys, "verify", "--witness", wfile)
    assert code == 0 and json.loads(stdout)["precisions"] == [160, 320]
    monkeypatch.setenv("DISCSPACES_PRECISION", "lots")
    assert run(capsys, "verify", "--witness", wfile)[0] == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "discspaces", "kernel-bound", "--nu", "0", "--gap", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["value"] == "1.0"
