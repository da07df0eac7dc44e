import json
import shutil
import subprocess
import sys

import pytest

from meroindex.cli import main
from meroindex.trimesh import fixture_path

F41 = str(fixture_path("4_1"))
M011 = str(fixture_path("m011"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def error_of(err):
    return json.loads(err.strip().splitlines()[-1])


def test_info(capsys):
    code, out, _ = run(capsys, "info", F41)
    assert code == 0
    info = json.loads(out)
    assert info["N"] == 2
    assert info["d_T"] == 1
    assert info["taut_structures"] == 1
    assert info["peripherally_trivial"] is True


def test_integrate(capsys):
    code, out, _ = run(capsys, "integrate", F41, "-0.25", "0", "2000")
    assert code == 0
    res = json.loads(out)
    assert res["output"]["real"] == pytest.approx(-3.620796017083117, abs=1e-6)
    assert res["input"]["samples"] == 2000


def test_threads_after_subcommand(capsys):
    code, out, _ = run(capsys, "integrate", F41, "-0.25", "0", "500", "--threads", "2")
    code1, out1, _ = run(capsys, "--threads", "1", "integrate", F41, "-0.25", "0", "500")
    assert code == code1 == 0
    assert json.loads(out)["output"] == json.loads(out1)["output"]


@pytest.mark.parametrize("argv", [
    ["integrate", F41, "0.25", "0", "100"],
    ["integrate", F41, "-0.25", "0", "0"],
    ["integrate", "/nonexistent.json", "-0.25", "0", "100"],
    ["integrate", F41, "-0.25", "0", "100000", "--eval-cap", "1000"],
    ["integrate", F41, "-0.25", "0", "100", "--threads", "0"],
    ["frobnicate"],
    [],
])
def test_input_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "error" in error_of(err)


def test_solve(capsys):
    code, out, _ = run(capsys, "solve", M011)
    assert code == 0
    res = json.loads(out)
    assert res["volume"] == pytest.approx(2.781833912396, abs=1e-8)
    assert res["n_combined"] == 1
    assert res["residual"] < 1e-10


def test_tau(capsys):
    code, out, _ = run(capsys, "tau", F41)
    assert code == 0
    assert json.loads(out)["tau"] == pytest.approx(3 ** -0.75, abs=1e-12)


def test_taut(capsys):
    code, out, _ = run(capsys, "taut", F41)
    assert json.loads(out) == {"count": 1, "structures": [[1, 1, -1, -1, 1, 1]]}


def test_mb(capsys):
    code, out, _ = run(capsys, "mb", F41, "--taut", "0")
    assert code == 0
    item = json.loads(out)["integrals"][0]
    assert abs(item["value"]) < 1e-3
    assert item["converged"]


def test_mb_bad_index(capsys):
    code, _, err = run(capsys, "mb", F41, "--taut", "3")
    assert code == 1
    assert error_of(err)["error"] == "InputError"


def test_mb_nonconvergence_exit_2(capsys):
    code, out, err = run(capsys, "mb", F41, "--radii", "1", "2", "3", "--nodes", "4", "--tol", "0")
    assert code == 2
    assert json.loads(out)["integrals"][0]["converged"] is False
    assert error_of(err)["error"] == "NonConvergence"


def test_beta(capsys):
    code, out, _ = run(capsys, "beta", F41)
    assert code == 0
    res = json.loads(out)
    assert res["defined"] and abs(res["total"]) < 1e-3


def test_predict(capsys):
    code, out, _ = run(capsys, "predict", F41, "--beta", "0", "--kappa", "30")
    assert code == 0
    res = json.loads(out)
    assert res["terms"][0] == {"kind": "linear", "slope": 0.0}
    assert res["terms"][1]["volume"] == pytest.approx(2.0298832128193, abs=1e-10)
    assert "prediction" in res


def test_compare_with_terms(capsys, tmp_path):
    terms = tmp_path / "terms.json"
    terms.write_text(json.dumps([{"kind": "linear", "slope": 1.0}]))
    code, out, _ = run(capsys, "compare", F41, "--kappa-min", "10", "--kappa-max", "12",
                       "--kappa-step", "1", "--samples", "500", "--terms", str(terms))
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "kappa,index,prediction,residual"
    assert len(lines) == 4
    assert [float(l.split(",")[2]) for l in lines[1:]] == [10.0, 11.0, 12.0]


def test_compare_empty_grid(capsys):
    code, out, _ = run(capsys, "compare", F41, "--kappa-min", "5", "--kappa-max", "4",
                       "--kappa-step", "1", "--samples", "100", "--beta", "0")
    assert code == 0
    assert out == "kappa,index,prediction,residual\n"


def test_compare_bad_terms_file(capsys, tmp_path):
    bad = tmp_path / "terms.json"
    bad.write_text('[{"kind": "oscillatory"}]')
    code, _, err = run(capsys, "compare", F41, "--kappa-min", "5", "--kappa-max", "6",
                       "--kappa-step", "1", "--samples", "100", "--terms", str(bad))
    assert code == 1
    assert error_of(err)["error"] == "InputError"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "meroindex", "taut", F41],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["count"] == 1


@pytest.mark.skipif(shutil.which("meroindex") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["meroindex", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip()
