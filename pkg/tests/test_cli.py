"""Command-line driver: runs, sweeps, reports, artifact layout.

Configs here are deliberately tiny (coarse grids, short horizons) so each
invocation stays well under a second; the physics-scale checks live in
test_acceptance.py.
"""

import csv
import json
import os

import numpy as np
import pytest

from subfp.cli import main

STEADY_CFG = """
name = "{name}"
gamma = 0.5
dim = 1
L = 25.0
n = 256
tasks = ["steady", "spectrum"]
"""

DECAY_CFG = """
name = "{name}"
gamma = 0.5
dim = 1
L = 25.0
n = 256
tasks = ["decay"]
t_min = 0.05
t_max = 20.0
n_times = 25
weight_family = "stretched"
weight_kappa = 0.5
weight_s = 0.3
sigma_fit = 0.3333333333333333
initial = "gaussian"
initial_center = 3.0
"""


def _write(path, text, name):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text.format(name=name))
    return str(path)


def _read_bytes(path):
    with open(path, "rb") as fh:
        return fh.read()


# =====================================================================
# run
# =====================================================================

def test_run_steady_artifacts(tmp_path, capsys):
    cfg = _write(tmp_path / "a.toml", STEADY_CFG, "steady-a")
    rc = main(["run", cfg, "--out", str(tmp_path / "runs")])
    assert rc == 0
    out_dir = tmp_path / "runs" / "steady-a"
    for fname in ("config.toml", "results.json", "certificates.csv",
                  "steady.csv", "steady.svg", "spectrum.svg"):
        assert (out_dir / fname).is_file(), fname
    text = capsys.readouterr().out
    assert "[pass] steady_residual" in text

    with open(out_dir / "results.json", encoding="utf-8") as fh:
        results = json.load(fh)
    assert results["all_passed"] is True
    names = {c["name"] for c in results["certificates"]}
    assert {"mass_conservative", "steady_residual", "steady_positive",
            "tail_bound", "field_conditions"} <= names


def test_run_steady_csv_contents(tmp_path):
    cfg = _write(tmp_path / "a.toml", STEADY_CFG, "steady-b")
    assert main(["run", cfg, "--out", str(tmp_path / "runs")]) == 0
    path = tmp_path / "runs" / "steady-b" / "steady.csv"
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x", "G"]
    assert len(rows) == 1 + 256
    xs = np.array([float(r[0]) for r in rows[1:]])
    gs = np.array([float(r[1]) for r in rows[1:]])
    assert np.all(np.diff(xs) > 0)
    assert np.all(gs > 0)
    # 17 significant digits: values round-trip exactly through the text
    h = 50.0 / 256.0
    assert xs[0] == -25.0 + 0.5 * h


def test_run_csv_is_rfc4180(tmp_path):
    cfg = _write(tmp_path / "a.toml", STEADY_CFG, "steady-crlf")
    assert main(["run", cfg, "--out", str(tmp_path / "runs")]) == 0
    raw = _read_bytes(tmp_path / "runs" / "steady-crlf" / "certificates.csv")
    assert b"\r\n" in raw


def test_run_decay_task(tmp_path):
    cfg = _write(tmp_path / "d.toml", DECAY_CFG, "decay-a")
    rc = main(["run", cfg, "--out", str(tmp_path / "runs")])
    assert rc == 0
    out_dir = tmp_path / "runs" / "decay-a"
    assert (out_dir / "decay.svg").is_file()
    with open(out_dir / "series.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header = rows[0]
    for col in ("t", "mass", "min", "distance"):
        assert col in header
    with open(out_dir / "results.json", encoding="utf-8") as fh:
        results = json.load(fh)
    fit = results["reports"]["decay"]["fit"]
    assert fit["exponent"] > 0.0
    assert fit["r_squared"] > 0.9


def test_run_is_deterministic(tmp_path):
    cfg = _write(tmp_path / "d.toml", DECAY_CFG, "decay-det")
    assert main(["run", cfg, "--out", str(tmp_path / "r1")]) == 0
    assert main(["run", cfg, "--out", str(tmp_path / "r2")]) == 0
    for fname in ("results.json", "certificates.csv", "series.csv",
                  "decay.svg"):
        a = _read_bytes(tmp_path / "r1" / "decay-det" / fname)
        b = _read_bytes(tmp_path / "r2" / "decay-det" / fname)
        assert a == b, f"{fname} differs between identical runs"


def test_run_invalid_config_writes_nothing(tmp_path, capsys):
    bad = tmp_path / "bad.toml"
    bad.write_text('name = "nope"\ngamma = 1.2\n', encoding="utf-8")
    rc = main(["run", str(bad), "--out", str(tmp_path / "runs")])
    assert rc == 2
    assert "gamma" in capsys.readouterr().err
    assert not (tmp_path / "runs").exists()


def test_run_respects_out_env(tmp_path, monkeypatch):
    cfg = _write(tmp_path / "a.toml", STEADY_CFG, "steady-env")
    monkeypatch.setenv("SUBFP_OUT", str(tmp_path / "env-root"))
    assert main(["run", cfg]) == 0
    assert (tmp_path / "env-root" / "steady-env" / "results.json").is_file()


def test_run_config_echo_roundtrip(tmp_path):
    from subfp import load_config

    cfg_path = _write(tmp_path / "a.toml", STEADY_CFG, "steady-echo")
    assert main(["run", cfg_path, "--out", str(tmp_path / "runs")]) == 0
    echoed = load_config(str(tmp_path / "runs" / "steady-echo" / "config.toml"))
    original = load_config(cfg_path)
    assert echoed.to_dict() == original.to_dict()


def test_run_failing_certificate_exits_nonzero(tmp_path, capsys):
    cfg = tmp_path / "l.toml"
    cfg.write_text(
        'name = "lyap-fail"\ngamma = 0.5\nL = 25.0\nn = 128\n'
        'tasks = ["lyapunov"]\nzeta0 = 50.0\nabsorb_M = 1.0\nabsorb_R = 2.0\n'
        'weight_family = "critical"\nweight_kappa = 0.5\n',
        encoding="utf-8")
    rc = main(["run", str(cfg), "--out", str(tmp_path / "runs")])
    assert rc == 1
    assert "FAIL" in capsys.readouterr().out


# =====================================================================
# sweep
# =====================================================================

def test_sweep_runs_all_configs(tmp_path):
    sweep_dir = tmp_path / "cfgs"
    sweep_dir.mkdir()
    _write(sweep_dir / "a.toml", STEADY_CFG, "sw-a")
    _write(sweep_dir / "b.toml", STEADY_CFG, "sw-b")
    rc = main(["sweep", str(sweep_dir), "--jobs", "2",
               "--out", str(tmp_path / "runs")])
    assert rc == 0
    assert (tmp_path / "runs" / "sw-a" / "results.json").is_file()
    assert (tmp_path / "runs" / "sw-b" / "results.json").is_file()


def test_sweep_empty_dir(tmp_path, capsys):
    empty = tmp_path / "none"
    empty.mkdir()
    assert main(["sweep", str(empty)]) == 2
    assert "no .toml" in capsys.readouterr().err


def test_sweep_reports_per_config_errors(tmp_path, capsys):
    sweep_dir = tmp_path / "cfgs"
    sweep_dir.mkdir()
    _write(sweep_dir / "a.toml", STEADY_CFG, "sw-ok")
    (sweep_dir / "z.toml").write_text('name = "zz"\ngamma = 2.0\n',
                                      encoding="utf-8")
    rc = main(["sweep", str(sweep_dir), "--out", str(tmp_path / "runs")])
    assert rc == 1
    out = capsys.readouterr().out
    assert "[pass] sw-ok" in out
    assert "[error]" in out


# =====================================================================
# report
# =====================================================================

def test_report_summarizes_runs(tmp_path, capsys):
    cfg = _write(tmp_path / "d.toml", DECAY_CFG, "decay-rep")
    runs = tmp_path / "runs"
    assert main(["run", str(cfg), "--out", str(runs)]) == 0
    capsys.readouterr()
    rc = main(["report", str(runs)])
    assert rc == 0
    text = capsys.readouterr().out
    assert "decay-rep" in text
    assert "fitted stretched exponent" in text
    assert (runs / "report.md").is_file()


def test_report_empty_dir(tmp_path, capsys):
    empty = tmp_path / "none"
    empty.mkdir()
    assert main(["report", str(empty)]) == 2
    assert "results.json" in capsys.readouterr().err
