import json
import subprocess
import sys

import numpy as np
import pytest

from stabrad import read_matrix_market
from stabrad.cli import main

GRCAR = ["--generator", "grcar:10", "--shift", "1"]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_radius_delta_artifacts(tmp_path, capsys):
    code, out, _ = run(capsys, "radius-delta", *GRCAR, "--structure", "sparsity-real:self", "--eps", "0.5",
                       "--out", str(tmp_path))
    assert code == 0
    assert "delta = 8.52283822982" in out
    trace = json.loads((tmp_path / "trace.json").read_text())
    assert trace["schema"] == "stabrad/1"
    assert abs(trace["final"] - 8.5228382298260e-1) < 1e-12
    table = (tmp_path / "trace.txt").read_text().splitlines()
    assert len(table) == 2 + len(trace["rows"]) == 6
    for line, row in zip(table[2:], trace["rows"]):
        k, value, re, steps = line.split()
        assert int(k) == row["k"] and int(steps) == row["steps"]
        assert float(value) == pytest.approx(row["value"], rel=1e-13, abs=1e-300)
    D = read_matrix_market(tmp_path / "Delta.mtx").matrix
    E = read_matrix_market(tmp_path / "E.mtx").matrix
    Theta = read_matrix_market(tmp_path / "Theta.mtx").matrix
    assert np.linalg.norm(D) == pytest.approx(trace["final"], rel=1e-12)
    assert np.allclose(Theta, 0.5 * E)
    A = np.diag(-2.0 * np.ones(10)) + np.eye(10, k=-1) - sum(np.eye(10, k=j) for j in (1, 2, 3))
    assert np.all(D[A == 0] == 0)
    assert abs(np.linalg.eigvals(A + D + Theta).real.max()) < 1e-8
    assert "timestamp" in json.loads((tmp_path / "meta.json").read_text())


def test_outputs_are_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        code, *_ = run(capsys, "radius-delta", *GRCAR, "--structure", "toeplitz-real:1,3", "--eps", "0.5",
                       "--out", str(d))
        assert code == 0
    for name in ("trace.json", "trace.txt", "E.mtx", "Delta.mtx", "Theta.mtx"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_radius_eps_and_stability_radius(tmp_path, capsys):
    code, out, _ = run(capsys, "radius-eps", *GRCAR, "--structure", "sparsity-real:self",
                       "--delta", "0.85228382298260")
    assert code == 0 and "eps = 4.99999999999" in out
    code, out, _ = run(capsys, "stability-radius", *GRCAR, "--out", str(tmp_path))
    assert code == 0 and "eps* = 8.392826121" in out
    d = json.loads((tmp_path / "trace.json").read_text())
    assert abs(d["final"] - d["axis_sweep"]["sigma_min"]) < 1e-6


def test_pseudospectrum_export(tmp_path, capsys):
    code, out, _ = run(capsys, "pseudospectrum", *GRCAR, "--levels", "0.1", "0.5", "--nx", "41", "--ny", "41",
                       "--out", str(tmp_path))
    assert code == 0
    field = (tmp_path / "field.csv").read_text().splitlines()
    assert field[0] == "re,im,sigma_min" and len(field) == 1 + 41 * 41
    levels = {line.split(",")[0] for line in (tmp_path / "contours.csv").read_text().splitlines()[1:]}
    assert len(levels) == 2


def test_pseudospectrum_overlay(tmp_path, capsys):
    run(capsys, "radius-delta", *GRCAR, "--structure", "sparsity-real:self", "--eps", "0.5", "--out", str(tmp_path))
    code, out, _ = run(capsys, "pseudospectrum", *GRCAR, "--eps", "0.5", "--perturbation",
                       str(tmp_path / "Delta.mtx"), "--re-min", "-1", "--re-max", "0.5", "--im-min", "1",
                       "--im-max", "3.5", "--nx", "151", "--ny", "151")
    assert code == 0
    right = float(out.split("rightmost Re = ")[1])
    assert abs(right) < 5e-3


def test_sample_joint_reproducible(tmp_path, capsys):
    for d in ("a", "b"):
        code, *_ = run(capsys, "sample-joint", *GRCAR, "--structure", "sparsity-real:self", "--eps", "0.3",
                       "--delta", "0.5", "--samples", "30", "--seed", "4", "--out", str(tmp_path / d))
        assert code == 0
    assert (tmp_path / "a" / "clouds.csv").read_bytes() == (tmp_path / "b" / "clouds.csv").read_bytes()


def test_verify_bounds(tmp_path, capsys):
    code, out, _ = run(capsys, "verify-bounds", *GRCAR, "--structure", "sparsity-real:self", "--eps", "0.5",
                       "--samples", "5", "--n-steps", "2000", "--out", str(tmp_path))
    assert code == 0, out
    rep = json.loads((tmp_path / "bounds.json").read_text())
    assert rep["label"] == "sampled certification"
    assert rep["violations"] == [] and rep["n_samples"] == 6
    assert rep["exp_check"]["dominated"]


def test_matrix_file_and_pattern_file(tmp_path, capsys):
    mtx = tmp_path / "a.mtx"
    mtx.write_text("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 1 -1\n2 2 -2\n1 2 0\n")
    code, out, _ = run(capsys, "radius-delta", "--matrix", str(mtx), "--structure", "sparsity-real:self",
                       "--eps", "0.5", "--out", str(tmp_path / "o"))
    assert code == 0
    # explicit zero (1, 2) belongs to the structure, so Delta may use it
    assert "1 2" in (tmp_path / "o" / "Delta.mtx").read_text()
    pat = tmp_path / "p.txt"
    pat.write_text("1 1\n2 2\n")
    code, *_ = run(capsys, "radius-delta", "--matrix", str(mtx), "--structure", "sparsity-real",
                   "--pattern-file", str(pat), "--eps", "0.5")
    assert code == 0


@pytest.mark.parametrize(
    "argv, code",
    [
        (["radius-delta", "--structure", "full-real", "--eps", "0.5"], 4),
        (["radius-delta", *GRCAR, "--structure", "banded", "--eps", "0.5"], 4),
        (["radius-delta", *GRCAR, "--structure", "full-real", "--eps", "-1"], 4),
        (["radius-delta", "--generator", "grcar:1501", "--structure", "full-real", "--eps", "0.5"], 21),
        (["radius-delta", "--matrix", "/nonexistent.mtx", "--structure", "full-real", "--eps", "0.5"], 3),
        (["stability-radius", "--generator", "grcar:10", "--shift", "-5"], 15),
        (["pseudospectrum", *GRCAR], 4),
    ],
)
def test_error_exit_codes(argv, code, capsys):
    got, _, err = run(capsys, *argv)
    assert got == code
    assert err.startswith("stabrad:")


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.mtx"
    bad.write_text("%%MatrixMarket matrix coordinate real general\n2 2 1\n9 9 1\n")
    code, _, err = run(capsys, "stability-radius", "--matrix", str(bad))
    assert code == 19 and "line 3" in err
    bad.write_text("%%MatrixMarket matrix coordinate pattern general\n2 2 1\n1 1\n")
    assert run(capsys, "stability-radius", "--matrix", str(bad))[0] == 20


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        main(["radius-delta", *GRCAR])
    assert e.value.code == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "stabrad", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("stabrad ")
