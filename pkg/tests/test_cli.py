import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from psimt.cli import CSV_SCHEMA, JSON_SCHEMA, main
from psimt.geometry import make_sphere, save_off, save_tet
from psimt.suites import oracle_field


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


def test_verify_algebra(capsys):
    code, rep, _ = run_json(capsys, "verify-algebra", "--seed", "7")
    assert code == 0
    assert rep["schema"] == JSON_SCHEMA
    assert rep["config"]["seed"] == 7 and rep["config"]["n"] == 1000
    assert rep["passed"] and rep["failures"] == []
    names = {c["name"] for c in rep["suites"][0]["checks"]}
    assert "associativity" in names


@pytest.mark.parametrize("argv", [["verify-algebra", "--seed", "3"], ["special-cases"], ["mt-residual", "--theta", "pi"]])
def test_csv_is_byte_identical(capsys, argv):
    _, a, _ = run(capsys, *argv, "--format", "csv")
    _, b, _ = run(capsys, *argv, "--format", "csv")
    assert a == b
    rows = list(csv.DictReader(io.StringIO(a)))
    assert rows and all(r["schema"] == CSV_SCHEMA for r in rows)


def test_special_cases_table(capsys):
    code, out, _ = run(capsys, "special-cases", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 4
    thetas = sorted(float(r["theta"]) for r in rows)
    np.testing.assert_allclose(thetas, [0, math.pi / 2, math.pi, 1.5 * math.pi])
    divrot = next(r for r in rows if r["case"] == "div-rot")
    assert divrot["map"] == "f1 i + f3 j + f2 k"


def test_structural_and_operators(capsys):
    assert run(capsys, "verify-structural")[0] == 0
    assert run(capsys, "verify-operators", "--theta", "3pi/2")[0] == 0


def test_mt_residual_exit_codes(capsys):
    assert run(capsys, "mt-residual", "--field", "kernel", "--theta", "1.0")[0] == 0
    code, rep, err = run_json(capsys, "mt-residual", "--field", "x1")
    assert code == 1
    assert rep["failures"] == ["mt_residual:max_residual"]
    assert "FAILED" in err
    assert run(capsys, "mt-residual", "--field", "no-such-field")[0] == 2


def test_bp_check(capsys):
    code, rep, _ = run_json(capsys, "bp-check", "--theta", "0", "--mesh", "sphere:3")
    assert code == 0
    bp = rep["suites"][0]
    worst = bp["info"]["max_residual"]
    assert worst == sorted(worst, reverse=True)
    assert bp["info"]["meshes"] == ["sphere:1", "sphere:2", "sphere:3"]


def test_bp_check_csv_columns(capsys):
    code, out, _ = run(capsys, "bp-check", "--level", "2", "--format", "csv")
    header = out.splitlines()[0].split(",")
    for col in ["x", "y", "z", "residual_re0", "residual_im3", "error_estimate"]:
        assert col in header


def test_jump_check(capsys):
    code, rep, _ = run_json(capsys, "jump-check", "--mesh", "sphere:3", "--max-nodes", "50")
    assert code == 0
    info = rep["suites"][0]["info"]
    assert info["meshes"] == ["sphere:3", "sphere:4"]
    assert info["jump_error"][1] <= info["jump_error"][0]


def test_mpsi_test_verdicts(capsys):
    code, rep, _ = run_json(capsys, "mpsi-test", "--field", "x2")
    assert code == 0  # unanimous, negative verdict
    assert rep["suites"][0]["info"]["member"] is False
    code, rep, _ = run_json(capsys, "mpsi-test", "--field", "kernel")
    assert code == 0 and rep["suites"][0]["info"]["member"] is True


def test_config_errors(capsys, tmp_path):
    assert run(capsys, "bp-check", "--mesh", str(tmp_path / "missing.off"))[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["bp-check", "--theta", "banana"])
    assert exc.value.code == 2
    assert run(capsys, "decompose", "--rho", "5")[0] == 2
    s, _ = make_sphere(level=1)
    save_off(tmp_path / "s.off", s)
    # surface file without tets
    assert run(capsys, "decompose", "--mesh", str(tmp_path / "s.off"))[0] == 2
    _, m = make_sphere(level=2)
    save_tet(tmp_path / "other.tet", m)
    code, _, err = run(capsys, "bp-check", "--mesh", str(tmp_path / "s.off"), "--tets", str(tmp_path / "other.tet"))
    assert code == 2 and "does not match" in err
    (tmp_path / "probes.csv").write_text("0,0\n")
    assert run(capsys, "mpsi-test", "--probes", str(tmp_path / "probes.csv"))[0] == 2


def _write_boundary_csv(path, surface, field, drop=0):
    vals = field(surface.centroids)
    with open(path, "w") as fh:
        fh.write("node,re1,im1,re2,im2,re3,im3\n")
        for n in range(surface.n_triangles - drop):
            reals = [float(x) for c in vals[n, 1:] for x in (c.real, c.imag)]
            fh.write(",".join([str(n)] + [repr(x) for x in reals]) + "\n")


def test_boundary_data_validation(capsys, tmp_path):
    s, _ = make_sphere(level=3)
    _write_boundary_csv(tmp_path / "f.csv", s, oracle_field(0.0)[0], drop=3)
    code, _, err = run(capsys, "mpsi-test", "--boundary-data", str(tmp_path / "f.csv"))
    assert code == 2 and "no data for 3 nodes" in err


def test_decompose_from_files(capsys, tmp_path):
    theta = 1.5707963
    s, m = make_sphere(level=3)
    save_off(tmp_path / "s.off", s)
    save_tet(tmp_path / "s.tet", m)
    _write_boundary_csv(tmp_path / "f.csv", s, oracle_field(theta)[0])
    out = tmp_path / "report.json"
    code, _, _ = run(
        capsys,
        "decompose",
        "--theta", str(theta),
        "--mesh", str(tmp_path / "s.off"),
        "--tets", str(tmp_path / "s.tet"),
        "--boundary-data", str(tmp_path / "f.csv"),
        "--probes", "builtin",
        "--max-nodes", "64",
        "--output", str(out),
    )  # fmt: skip
    assert code == 0
    rep = json.loads(out.read_text())
    info = rep["suites"][0]["info"]
    assert info["trace_residual_max"] < 0.05 * math.sqrt(2)
    assert [round(d["radius"], 6) for d in info["decay"]][:2] == [2.5, 5.0]
    assert rep["config"]["theta"] == pytest.approx(theta)
    assert info["profile"] == "quintic"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "psimt.cli", "special-cases"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["command"] == "special-cases"
