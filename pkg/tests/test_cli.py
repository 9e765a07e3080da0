import json
import logging

import numpy as np
import pytest

from ionlayer import cli, verify
from ionlayer.exact import SingleSpeciesSolution, eval_u


def run(argv, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = cli.run([*argv, "--out", str(out)])
    return code, out


def test_solve_csv(tmp_path):
    code, out = run(["solve", "--lambda", "1e4", "--grid", "2000"], tmp_path)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "r,u,du,rho" and len(lines) == 2002
    r, u = (float(x) for x in lines[-1].split(",")[:2])
    assert r == 1.0 and u == eval_u(SingleSpeciesSolution.from_lambda(1e4), 1.0)
    assert b"\r" not in out.read_bytes()


def test_solve_json(tmp_path):
    code, out = run(["solve", "--lambda", "10", "--grid", "64", "--format", "json"], tmp_path, "u.json")
    assert code == 0
    data = json.loads(out.read_text())
    assert len(data["r"]) == 65 and data["lambda"] == 10.0


def test_byte_stable(tmp_path):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    for path in (a, b):
        assert cli.run(["capacitance", "--lambda-grid", "1e3:1e5:3", "--p", "2", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_jobs_do_not_change_output(tmp_path):
    outs = []
    for jobs in ("1", "3"):
        path = tmp_path / f"c{jobs}.csv"
        assert cli.run(["concentration", "--lambda-grid", "1e2:1e5:4", "--jobs", jobs, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    lines = outs[0].decode().splitlines()
    assert lines[0] == "lambda,h_id,charge,energy,h_at_1,gap"
    assert len(lines) == 1 + 4 * 6


def test_figure1(tmp_path):
    code, out = run(["figure1", "--lambda", "1e4", "--mu", "1e4,1e3,1e2,10,0", "--jobs", "2"], tmp_path)
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "r,v_mu=10000,v_mu=1000,v_mu=100,v_mu=10,v_mu=0"
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert np.max(np.abs(data[:, 1])) <= 1e-12
    assert np.all(np.diff(data[:, 1:], axis=1) <= 0)


def test_ccpb_with_sidecar(tmp_path):
    code, out = run(["ccpb", "--lambda", "100", "--mu", "1", "--grid", "500"], tmp_path)
    assert code == 0
    assert out.read_text().startswith("r,v,dv,u,w\n")
    meta = json.loads((tmp_path / "out.csv.json").read_text())
    assert meta["converged"] is True and meta["mu"] == 1.0


def test_asym_outputs(tmp_path):
    code, out = run(["asym", "--lambda-grid", "1e3:1e5:3", "--expansion", "j", "--order", "3"], tmp_path)
    assert code == 0
    rows = out.read_text().splitlines()[1:]
    assert len(rows) == 3 and all(r.startswith("j,") for r in rows)
    code, out = run(["asym", "--lambda", "1e6", "--p", "1", "--alpha", "2", "--format", "json"], tmp_path, "n.json")
    assert code == 0 and json.loads(out.read_text())[0]["alpha"] == 2.0


@pytest.mark.parametrize(
    "argv",
    [
        ["ccpb", "--lambda", "10", "--mu", "20"],
        ["solve", "--lambda", "-1"],
        ["capacitance", "--p", "0"],
        ["asym", "--p", "1"],
        ["concentration", "--lambda-grid", "1:2"],
        ["solve", "--grid", "abc"],
        ["nonsense"],
        ["capacitance", "--jobs", "0"],
    ],
)
def test_validation_exit_code(argv, tmp_path, capsys):
    assert cli.run([*argv, "--out", str(tmp_path / "x")]) == 2
    assert "usage" in capsys.readouterr().err
    assert not (tmp_path / "x").exists()


def test_no_convergence_exit_code(tmp_path, capsys):
    argv = ["ccpb", "--lambda", "1e4", "--mu", "10", "--grid", "200", "--method", "picard"]
    assert cli.run([*argv, "--out", str(tmp_path / "x")]) == 3
    assert "last residual" in capsys.readouterr().err


def test_envelope_warning(tmp_path, caplog):
    with caplog.at_level(logging.WARNING, logger="ionlayer"):
        code, _ = run(["solve", "--lambda", "1e11", "--grid", "64"], tmp_path)
    assert code == 0
    assert "outside the supported range" in caplog.text


def test_lambda_grid_parser():
    assert cli.parse_lambda_grid("1e3:1e6:4") == [1e3, 1e4, 1e5, 1e6]
    assert cli.parse_lambda_grid("10,20") == [10.0, 20.0]
    assert cli.parse_lambda_grid("5:50:1") == [5.0]


def test_verify_subcommand(tmp_path):
    code, out = run(["verify", "--suite", "concentration", "--lambda-grid", "1e3:1e4:2"], tmp_path, "v.json")
    assert code == 0
    report = json.loads(out.read_text())
    assert report["passed"] is True and list(report["suites"]) == ["concentration"]


def test_verify_failure_exit_code(tmp_path, monkeypatch):
    monkeypatch.setitem(verify.SUITES, "concentration", lambda grid: [verify.Check("broken", False, "x")])
    code, out = run(["verify", "--suite", "concentration"], tmp_path, "v.json")
    assert code != 0
    assert json.loads(out.read_text())["passed"] is False


def test_console_script_entry_point():
    from importlib.metadata import entry_points

    eps = [e for e in entry_points(group="console_scripts") if e.name == "ionlayer"]
    assert eps and eps[0].value == "ionlayer.cli:main"
