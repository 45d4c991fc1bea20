import csv
import json
import subprocess
import sys

import pytest

from nehari_lab.cli import dispatch, dumps

SMALL = ["--n", "1024"]


def run(argv, capsys):
    code = dispatch(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_thresholds_young_constant(capsys):
    code, out, _ = run(["thresholds", "--p", "2.5", "--lambda", "1", "--beta", "0", *SMALL], capsys)
    assert code == 0
    body = json.loads(out)
    assert body["C_p_beta"] == pytest.approx(0.08, abs=1e-16)


def test_envelope(capsys):
    _, out, _ = run(["thresholds", "--p", "3", "--lambda", "0.5", "--beta", "1", *SMALL], capsys)
    body = json.loads(out)
    assert body["schema_version"] == 1 and body["command"] == "thresholds"
    assert body["grid"] == {"n": 1024, "r_max": 30.0, "scheme": "log"}
    assert body["kappa"] == 1.0 and "kappa_convention" in body and body["build"]
    assert body["C_p_beta"] is None


def test_fibering_direct_coeffs(capsys, tmp_path):
    path = tmp_path / "h.csv"
    code, out, _ = run(["fibering", "--p", "3", "--coeffs", "1,1,3", "--csv", str(path)], capsys)
    assert code == 0
    roots = json.loads(out)["roots"]
    assert round(roots["t_minus"], 6) == 0.381966 and round(roots["t_plus"], 6) == 2.618034
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "h", "hp", "hpp"] and len(rows) > 10


def test_fibering_split_soliton(capsys):
    code, out, _ = run(["fibering", "--p", "2.5", "--lambda", "0.001", "--beta", "1", *SMALL], capsys)
    body = json.loads(out)
    assert code == 0 and body["roots"]["count"] == 2


def test_multibump_csv(capsys):
    code, out, _ = run(["multibump", "--p", "2.5", "--lambda", "1", "--beta", "14.03", "--R0", "3",
                        "--N-list", "1,2,4,8", *SMALL], capsys)
    assert code == 0
    rows = list(csv.reader(out.splitlines()))
    assert rows[0] == ["N", "spacing", "t2", "J", "cross_term", "bound"]
    J = [float(r[3]) for r in rows[1:]]
    assert all(a > b for a, b in zip(J, J[1:])) and J[-1] < 0


def test_verify_identities(capsys):
    code, out, err = run(["verify", "--suite", "identities"], capsys)
    assert code == 0
    assert "FAIL" not in err and err.count("PASS") == 10
    assert all(c["passed"] for c in json.loads(out)["checks"])


@pytest.mark.parametrize("argv", [
    ["thresholds", "--p", "5", "--lambda", "1", "--beta", "0"],
    ["thresholds", "--p", "2.5", "--lambda", "-1", "--beta", "0"],
    ["solve", "--p", "2.5", "--lambda", "1", "--beta", "-2"],
    ["thresholds", "--p", "2.5", "--lambda", "1", "--beta", "0", "--n", "10"],
    ["fibering", "--p", "3", "--coeffs", "1,2"],
    ["verify", "--suite", "nonsense"],
    ["frobnicate"],
])
def test_validation_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and err


def test_internal_error_exit_1(capsys):
    code, _, err = run(["multibump", "--p", "2.5", "--lambda", "1", "--beta", "7.1", "--R0", "3", *SMALL], capsys)
    assert code == 1 and "internal error" in err


def test_nonconvergence_exit_3(capsys):
    code, out, _ = run(["solve", "--p", "3.5", "--lambda", "0.1", "--beta", "5", "--mode", "global", *SMALL], capsys)
    assert code == 3
    assert json.loads(out)["reports"][0]["converged"] is False


def test_out_file_and_determinism(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        assert dispatch(["lambda", "--p", "2.5", "--beta", "1", "--n-random", "1", "--n", "512",
                         "--seed", "4", "--out", str(path)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()
    assert json.loads(paths[0].read_text())["seed"] == 4


def test_lambda_sweep_parallel(capsys):
    args = ["lambda", "--p", "2.5", "--beta", "0,1", "--n-random", "1", "--n", "512"]
    _, serial, _ = run(args, capsys)
    _, parallel, _ = run(args + ["--jobs", "2"], capsys)
    assert serial == parallel
    values = [r["value"] for r in json.loads(serial)["results"]]
    assert values[0] <= values[1]


def test_env_grid_override(tmp_path):
    env = {"NEHARI_LAB_GRID_N": "512", "PATH": "/usr/bin:/bin"}
    out = subprocess.run([sys.executable, "-m", "nehari_lab", "thresholds", "--p", "2.5", "--lambda", "1",
                          "--beta", "0"], capture_output=True, text=True, env=env, check=True).stdout
    assert json.loads(out)["grid"]["n"] == 512


def test_float_format():
    assert dumps({"x": 0.1, "y": 1 / 3}) == '{\n  "x": 0.10000000000000001,\n  "y": 0.33333333333333331\n}\n'
