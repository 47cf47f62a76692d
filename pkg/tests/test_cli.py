import json
import subprocess
import sys

import pytest

from pinnfem import experiments
from pinnfem.cli import main
from pinnfem.experiments import ExperimentConfig, load_shipped


def small_config(tmp_path, name="exp1_pinn-fem.json", **over):
    d = load_shipped(name).to_dict()
    d.update(mesh={"unit_square": 0.25}, net={"hidden": 8, "depth": 2, "normalize_inputs": True},
             optim=dict(d["optim"], max_iterations=3))
    d.update(over)
    p = tmp_path / ("cfg_" + name)
    p.write_text(json.dumps(d))
    return p


def test_mesh_info(capsys):
    from importlib import resources
    with resources.as_file(resources.files("pinnfem") / "fixtures" / "square_h0p5.msh") as p:
        assert main(["mesh-info", str(p)]) == 0
    out = capsys.readouterr().out
    assert "nodes      9" in out and "triangles  8" in out


def test_solve_fem(tmp_path, capsys):
    cfg = small_config(tmp_path)
    out = tmp_path / "fields.csv"
    assert main(["solve-fem", str(cfg), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "node_id,x,y,ux,uy" and len(lines) == 26
    assert main(["solve-fem", str(cfg)]) == 0
    assert capsys.readouterr().out.count("\n") >= 26


def test_train_then_eval(tmp_path, capsys):
    cfg = small_config(tmp_path)
    run = tmp_path / "run"
    assert main(["train", str(cfg), "--out", str(run)]) == 0
    name = ExperimentConfig.load(cfg).name
    assert (run / (name + ".ckpt")).is_file()
    assert main(["eval", str(run / (name + ".ckpt")), str(cfg)]) == 0
    out = capsys.readouterr().out
    assert out.count("e(ux)") == 2


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["train", str(tmp_path / "missing.json")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"name": "b", "strategy": "nope", "dirichlet": [{"tag": "left"}]}))
    assert main(["train", str(bad)]) == 2
    assert main(["eval", str(tmp_path / "none.ckpt"), str(small_config(tmp_path))]) == 2
    assert "config error" in capsys.readouterr().err


def test_unavailable_strategy_exit_1(tmp_path, capsys):
    cfg = small_config(tmp_path, "exp4_soft.json", strategy="df")
    assert main(["train", str(cfg)]) == 1
    assert "StrategyUnavailableError" in capsys.readouterr().err


def test_reproduce_all(tmp_path, monkeypatch, capsys):
    cfgs = [ExperimentConfig.load(small_config(tmp_path, "exp1_%s.json" % s)) for s in ("soft", "pinn-fem")]
    monkeypatch.setattr(experiments, "sweep_configs", lambda: cfgs)
    assert main(["reproduce-all", str(tmp_path / "all")]) == 0
    assert (tmp_path / "all" / "summary.csv").is_file()
    assert "| Experiment |" in capsys.readouterr().out


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "pinnfem", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd in ("mesh-info", "solve-fem", "train", "eval", "reproduce-all"):
        assert cmd in r.stdout
