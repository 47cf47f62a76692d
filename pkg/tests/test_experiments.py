import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pinnfem import net
from pinnfem.bcfield import StrategyUnavailableError
from pinnfem.experiments import (ConfigError, ExperimentConfig, UndefinedMetricError, build, compile_expr,
                                 evaluate_checkpoint, load_shipped, relative_l1, reproduce_all,
                                 run_experiment, shipped_configs, sweep_configs)


def small(cfg, iters=5, h=0.25):
    d = cfg.to_dict()
    d["optim"] = dict(d["optim"], max_iterations=iters)
    d["net"] = {"hidden": 8, "depth": 2, "normalize_inputs": True}
    if "unit_square" in d["mesh"]:
        d["mesh"] = {"unit_square": h}
    return ExperimentConfig.from_dict(d)


# metrics ----------------------------------------------------------------------

def test_relative_l1_examples():
    t = np.array([[1.0, 2.0], [3.0, -4.0]])
    assert relative_l1(t, t) == (0.0, 0.0)
    assert relative_l1(np.zeros_like(t), t) == (1.0, 1.0)
    assert relative_l1(1.5 * t, t) == pytest.approx((0.5, 0.5))
    assert relative_l1([1.0, 1.0], [2.0, 2.0]) == (0.5,)


def test_relative_l1_undefined():
    with pytest.raises(UndefinedMetricError):
        relative_l1(np.ones((3, 2)), np.column_stack([np.ones(3), np.zeros(3)]))
    with pytest.raises(ValueError):
        relative_l1(np.ones((3, 2)), np.ones((2, 2)))


@given(st.floats(1e-3, 1e3), st.integers(0, 1000))
def test_relative_l1_scale_invariant(c, seed):
    rng = np.random.default_rng(seed)
    p, t = rng.normal(size=(6, 2)), rng.normal(size=(6, 2)) + 3.0
    np.testing.assert_allclose(relative_l1(c * p, c * t), relative_l1(p, t), rtol=1e-12)


# expressions and configs --------------------------------------------------------

def test_compile_expr():
    f = compile_expr("10*(0.0625 - y**2)")
    np.testing.assert_allclose(f(np.zeros(3), np.array([0.0, 0.25, -0.1])), [0.625, 0.0, 0.525])
    g = compile_expr("x < 1e-9 and y <= 0.5")
    assert g(np.array([0.0, 0.0, 0.3]), np.array([0.2, 0.7, 0.1])).tolist() == [True, False, False]
    assert compile_expr("sqrt(x) + pi")(4.0, 0.0) == pytest.approx(2 + np.pi)
    assert compile_expr(3)(np.zeros(2), np.zeros(2)).tolist() == [3.0, 3.0]


@pytest.mark.parametrize("src", ["__import__('os')", "x.real", "z + 1", "open('f')", "x if y else 1",
                                 "lambda: 1", "(x", True])
def test_compile_expr_rejects(src):
    with pytest.raises(ConfigError):
        compile_expr(src)


def test_config_validation(tmp_path):
    base = load_shipped("exp1_soft.json").to_dict()
    with pytest.raises(ConfigError, match="unknown config keys"):
        ExperimentConfig.from_dict(dict(base, colour="red"))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(base, strategy="magic"))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(base, dirichlet=[]))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(base, optim={"method": "sgd"}))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(base, net={"hidden": 8, "width": 3})).mlp_spec()
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(dict(base, mesh={"fixture": "nope.msh"})).build_mesh()
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        ExperimentConfig.load(bad)


def test_config_round_trip(tmp_path):
    cfg = load_shipped("exp6_pinn-fem.json")
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    assert ExperimentConfig.load(p).to_dict() == cfg.to_dict()


def test_shipped_configs_cover_the_sweep():
    names = shipped_configs()
    assert len(sweep_configs()) == 18
    assert {"bar_one_end.json", "bar_both_ends.json"} <= set(names)


@pytest.mark.parametrize("exp,strategy", [("exp2", "df"), ("exp3", "df"), ("exp4", "df"), ("exp4", "adf")])
def test_unavailable_baselines(exp, strategy):
    d = load_shipped("%s_soft.json" % exp).to_dict()
    cfg = ExperimentConfig.from_dict(dict(d, strategy=strategy, name="x"))
    with pytest.raises(StrategyUnavailableError):
        build(cfg)


# running ------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["exp1_pinn-fem.json", "exp3_pinn-fem.json", "exp4_pinn-fem.json",
                                  "exp5_pinn-fem.json"])
def test_pinn_fem_dirichlet_exact_before_training(name):
    cfg = small(load_shipped(name))
    b = build(cfg)
    theta = net.init_params(b.spec, 0)
    pred = b.predict(theta)
    mask, values = b.decomposition.dirichlet_mask, b.decomposition.dirichlet_values
    assert np.abs(pred[mask] - values[mask]).max() == 0.0


def test_bar_runs_accurately():
    rep = run_experiment(load_shipped("bar_one_end.json"))
    assert rep.e_ux < 1e-2
    assert rep.trace["status"] in ("converged-grad", "converged-step", "max-iter")


def test_outputs_and_checkpoint_eval(tmp_path):
    cfg = small(load_shipped("exp1_pinn-fem.json"))
    rep = run_experiment(cfg, tmp_path)
    for suffix in (".report.json", ".timing.json", ".fields.csv", ".trace.csv", ".ckpt", ".ckpt.json"):
        assert (tmp_path / (cfg.name + suffix)).is_file()
    data = json.loads((tmp_path / (cfg.name + ".report.json")).read_text())
    assert "wall_time" not in data and data["errors"] == list(rep.errors)
    again = evaluate_checkpoint(tmp_path / (cfg.name + ".ckpt"), cfg)
    assert again.errors == rep.errors
    other = small(load_shipped("exp1_pinn-fem.json"))
    other.net = {"hidden": 4, "depth": 2}
    with pytest.raises(ConfigError):
        evaluate_checkpoint(tmp_path / (cfg.name + ".ckpt"), other)


def test_reproduce_all_small(tmp_path):
    cfgs = [small(load_shipped("exp1_%s.json" % s), iters=3) for s in ("soft", "pinn-fem")]
    rows = reproduce_all(tmp_path, cfgs)
    assert [r["strategy"] for r in rows] == ["soft", "pinn-fem"]
    assert all(r["status"] == "ok" and r["pass"] in ("pass", "fail") for r in rows)
    text = (tmp_path / "summary.csv").read_text()
    assert text.splitlines()[0].startswith("experiment,title,strategy,e_ux,e_uy")
    assert (tmp_path / "summary.md").is_file()
