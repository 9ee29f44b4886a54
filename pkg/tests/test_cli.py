import csv
import json
import math

import numpy as np
import pytest

import relyap.experiments as ex
from relyap.cli import main, parse_gamma
from relyap.errors import NumericFailure
from relyap.experiments import ExperimentConfig, ConfigError, gamma_grid, gamma_seed

FAST = ["--M", "6", "--N", "6", "--tf", "30"]


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def test_lyapunov_outputs(tmp_path, capsys):
    assert main(["lyapunov", "--gamma", "0.5", *FAST, "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "les.csv")
    assert header == ["index", "lambda"] and len(rows) == 7
    header, rows = read_csv(tmp_path / "history.csv")
    assert header == ["step", "t", *[f"lambda_{i}" for i in range(1, 8)]]
    assert len(rows) == 10 and float(rows[-1][1]) == 30.0
    assert "lambda_1" in capsys.readouterr().out


def test_outputs_deterministic(tmp_path):
    for sub in ("a", "b"):
        assert main(["lyapunov", "--gamma", "4", *FAST, "--seed", "3", "--out", str(tmp_path / sub)]) == 0
    for name in ("les.csv", "history.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_json_config_and_override(tmp_path):
    cfg = {"gamma": 3.0, "M": 6, "N": 6, "t_f": 30, "r": 20, "phi0": 0.2, "seed": 1,
           "quad_order": 20, "transient_skip": 6.0, "output_dir": str(tmp_path / "json")}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["lyapunov", "--config", str(path)]) == 0
    assert (tmp_path / "json" / "les.csv").exists()
    assert main(["lyapunov", "--config", str(path), "--out", str(tmp_path / "flag"), "--M", "7"]) == 0
    assert len(read_csv(tmp_path / "flag" / "les.csv")[1]) == 8


@pytest.mark.parametrize(
    "argv",
    [
        ["lyapunov", "--gamma", "0.5", "--M", "3", "--N", "8"],
        ["lyapunov", "--gamma", "0.5", "--tf", "2"],
        ["lyapunov", "--gamma", "-1", "--tf", "30"],
        ["lyapunov", "--gamma", "0.5", "--r", "0", "--tf", "30"],
        ["diagram", "--gamma", "4.0:6.0:0.1", "--tf", "30"],
        ["diagram", "--gamma", "4.0:4.2:0", "--tf", "30"],
        ["lyapunov", "--gamma", "4.0:4.2:0.1", "--tf", "30"],
    ],
)
def test_config_errors_exit_2(argv, tmp_path):
    assert main([*argv, "--out", str(tmp_path)]) == 2


def test_bad_json_config(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    assert main(["lyapunov", "--config", str(path)]) == 2
    path.write_text(json.dumps({"gamma": 1.0, "bogus": 3}))
    assert main(["lyapunov", "--config", str(path)]) == 2


def test_numeric_failure_exit_3(tmp_path, monkeypatch):
    def boom(*args, **kwargs):
        raise NumericFailure("eigensolver failed")

    monkeypatch.setattr(ex, "lyapunov_exponents", boom)
    assert main(["lyapunov", "--gamma", "0.5", *FAST, "--out", str(tmp_path)]) == 3


def test_solve_writes_trajectory(tmp_path):
    assert main(["solve", "--gamma", "3", "--tf", "10", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "trajectory.csv")
    assert header == ["t", "x_1"] and len(rows) == 401
    assert float(rows[1][1]) == pytest.approx(0.27)


def test_diagram(tmp_path):
    assert main(["diagram", "--gamma", "3.5:3.7:0.05", *FAST, "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "diagram.csv")
    assert header == ["gamma", *[f"le{i}" for i in range(1, 8)]]
    assert len(rows) == 5
    assert {len(r) for r in rows} == {len(header)}
    gammas = [float(r[0]) for r in rows]
    assert gammas == sorted(gammas)
    for r in rows:
        les = [float(v) for v in r[1:]]
        assert les == sorted(les, reverse=True)
    script = (tmp_path / "diagram.gp").read_text()
    assert "diagram.csv" in script and "using 1:2" in script and "using 1:3" in script


def test_diagram_failed_gamma_gives_nan_row(tmp_path, monkeypatch):
    real = ex.lyapunov_exponents

    def flaky(gamma, cfg, **kw):
        if abs(gamma - 3.6) < 1e-9:
            raise NumericFailure("synthetic")
        return real(gamma, cfg, **kw)

    monkeypatch.setattr(ex, "lyapunov_exponents", flaky)
    assert main(["diagram", "--gamma", "3.5:3.7:0.1", *FAST, "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "diagram.csv")
    assert len(rows) == 3
    assert all(v == "nan" for v in rows[1][1:])
    assert all(math.isfinite(float(v)) for v in rows[0][1:] + rows[2][1:])


def test_converge_tf(tmp_path, capsys):
    assert main(["converge", "--gamma", "0.5", "--M", "8", "--N", "8", "--mode", "tf", "--out", str(tmp_path)]) == 0
    header, rows = read_csv(tmp_path / "convergence_tf.csv")
    assert header == ["tf", "lambda", "reference", "error"] and len(rows) == 4
    errors = [float(r[3]) for r in rows]
    assert errors == sorted(errors, reverse=True)
    assert "slope" in capsys.readouterr().out


def test_converge_mn_periodic_reference(tmp_path):
    cfg = ExperimentConfig(gamma=4.0, t_f=60, output_dir=str(tmp_path))
    rows = ex.run_convergence(cfg, "MN", values=[6, 8])
    # no equilibrium: the finest run is the reference
    assert rows[-1]["error"] == 0.0 and rows[0]["reference"] == rows[-1]["lambda"]
    assert (tmp_path / "convergence_MN.csv").exists()


def test_minus_inf_literal(tmp_path):
    from relyap.dqr import LyapunovEstimate

    est = LyapunovEstimate(np.array([-np.inf, np.nan, 0.5]), np.zeros((1, 3)), np.array([3.0]), 3.0)
    ex.write_les(tmp_path / "les.csv", est)
    _, rows = read_csv(tmp_path / "les.csv")
    assert [r[1] for r in rows[:2]] == ["-inf", "nan"]


def test_parse_gamma():
    assert parse_gamma("4.5") == 4.5
    assert parse_gamma("2.5:5:0.01") == {"start": 2.5, "stop": 5.0, "step": 0.01}
    assert parse_gamma('{"start": 1, "stop": 2, "step": 0.5}') == {"start": 1, "stop": 2, "step": 0.5}


def test_gamma_grid_and_presets():
    g = gamma_grid({"start": 2.5, "stop": 5.0, "step": 0.01})
    assert len(g) == 251 and g[0] == 2.5 and g[-1] == 5.0
    fine = gamma_grid(ex.GAMMA_PRESETS["island"])
    assert len(fine) == len(g) + 100 - 10
    with pytest.raises(ConfigError):
        gamma_grid({"start": 0.0, "stop": 1.0, "step": 0.1})


def test_gamma_seed_deterministic():
    assert gamma_seed(0, 4.33) == gamma_seed(0, 4.33)
    assert gamma_seed(0, 4.33) != gamma_seed(0, 4.35)
    assert gamma_seed(1, 4.33) != gamma_seed(0, 4.33)


def test_config_invariants():
    with pytest.raises(ConfigError):
        ExperimentConfig(M=4, N=8)
    with pytest.raises(ConfigError):
        ExperimentConfig(N=0)
    assert ExperimentConfig(M=7, N=8).Q == 2 * 8 + 8
    assert ExperimentConfig(quad_order=12).Q == 12


def test_dump_matrices(tmp_path):
    assert main(["lyapunov", "--gamma", "4", *FAST, "--dump-matrices", "2", "--out", str(tmp_path)]) == 0
    files = sorted((tmp_path / "matrices").glob("T_*.csv"))
    assert [f.name for f in files] == ["T_00000.csv", "T_00001.csv"]
    header, rows = read_csv(files[0])
    assert len(header) == 7 and len(rows) == 7
