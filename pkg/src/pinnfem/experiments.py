"""Experiment configs, training driver, metrics and the reproduction sweep."""
from __future__ import annotations

import ast
import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import net
from .analytic import CantileverSpec, bar_1d_solution, timoshenko_displacement
from .bcfield import STRATEGIES, make_strategy
from .elasticity import Material
from .energy import Bar1D, Bar1DField, EnergyFunctional, Problem, energy_1d_loss_and_grad
from .femref import solve_fem
from .mesh import (DirichletSpec, MeshError, NeumannSpec, decompose, read_msh,
                   structured_rectangle, structured_unit_square)
from .optim import OptimConfig, minimize

log = logging.getLogger(__name__)

GROUND_TRUTHS = ("fem-oracle", "analytic-timoshenko", "analytic-1d")


class ConfigError(ValueError):
    pass


class UndefinedMetricError(ZeroDivisionError):
    pass


# ---------------------------------------------------------------------------
# expressions: "10*(0.0625 - y**2)", "x < 1e-9 and y <= 0.5", ...
# ---------------------------------------------------------------------------

_FUNCS = {
    "abs": np.abs, "sqrt": np.sqrt, "exp": np.exp, "log": np.log,
    "sin": np.sin, "cos": np.cos, "tan": np.tan, "hypot": np.hypot,
    "minimum": np.minimum, "maximum": np.maximum, "where": np.where,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power, ast.Mod: np.mod}
_CMPOPS = {ast.Lt: np.less, ast.LtE: np.less_equal, ast.Gt: np.greater,
           ast.GtE: np.greater_equal, ast.Eq: np.equal, ast.NotEq: np.not_equal}


def _compile_node(node, src):
    if isinstance(node, ast.Expression):
        return _compile_node(node.body, src)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        v = float(node.value)
        return lambda x, y: v
    if isinstance(node, ast.Name):
        if node.id == "x":
            return lambda x, y: x
        if node.id == "y":
            return lambda x, y: y
        if node.id in _CONSTS:
            v = _CONSTS[node.id]
            return lambda x, y: v
        raise ConfigError("unknown name %r in expression %r" % (node.id, src))
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        op, a, b = _BINOPS[type(node.op)], _compile_node(node.left, src), _compile_node(node.right, src)
        return lambda x, y: op(a(x, y), b(x, y))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd, ast.Not)):
        a = _compile_node(node.operand, src)
        if isinstance(node.op, ast.USub):
            return lambda x, y: np.negative(a(x, y))
        if isinstance(node.op, ast.Not):
            return lambda x, y: np.logical_not(a(x, y))
        return a
    if isinstance(node, ast.BoolOp):
        parts = [_compile_node(v, src) for v in node.values]
        op = np.logical_and if isinstance(node.op, ast.And) else np.logical_or

        def boolop(x, y):
            out = parts[0](x, y)
            for p in parts[1:]:
                out = op(out, p(x, y))
            return out
        return boolop
    if isinstance(node, ast.Compare) and all(type(o) in _CMPOPS for o in node.ops):
        terms = [_compile_node(node.left, src)] + [_compile_node(c, src) for c in node.comparators]
        ops = [_CMPOPS[type(o)] for o in node.ops]

        def compare(x, y):
            vals = [t(x, y) for t in terms]
            out = ops[0](vals[0], vals[1])
            for k in range(1, len(ops)):
                out = np.logical_and(out, ops[k](vals[k], vals[k + 1]))
            return out
        return compare
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS \
            and not node.keywords:
        fn = _FUNCS[node.func.id]
        args = [_compile_node(a, src) for a in node.args]
        return lambda x, y: fn(*[a(x, y) for a in args])
    raise ConfigError("unsupported syntax %r in expression %r" % (type(node).__name__, src))


def compile_expr(src):
    """Compile an arithmetic/boolean expression in ``x`` and ``y`` into a
    vectorised function. Only a whitelisted subset of Python is accepted."""
    if isinstance(src, (int, float)) and not isinstance(src, bool):
        v = float(src)
        return lambda x, y: v + 0.0 * np.asarray(x, dtype=np.float64)
    if not isinstance(src, str):
        raise ConfigError("expected a number or expression string, got %r" % (src,))
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError as exc:
        raise ConfigError("cannot parse expression %r: %s" % (src, exc.msg)) from None
    f = _compile_node(tree, src)
    return lambda x, y: f(np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64))


def _vector_fn(spec, what):
    if isinstance(spec, (list, tuple)) and len(spec) == 2:
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in spec):
            return tuple(float(v) for v in spec)
        fx, fy = compile_expr(spec[0]), compile_expr(spec[1])
        return lambda x, y: (fx(x, y), fy(x, y))
    raise ConfigError("%s must be a 2-element list of numbers or expressions, got %r" % (what, spec))


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

_COMPONENTS = {"x": (True, False), "y": (False, True), "xy": (True, True)}


@dataclass
class ExperimentConfig:
    """A single (experiment, strategy) run, usually loaded from JSON.

    ``mesh`` is one of ``{"unit_square": h}``, ``{"rectangle": [x0, x1, y0, y1, nx, ny]}``
    or ``{"fixture": name}`` / ``{"path": file}``. Dirichlet entries pick
    nodes by ``tag``, ``where`` (boolean expression), ``points`` or ``nodes``.
    """
    name: str
    mesh: dict = field(default_factory=lambda: {"unit_square": 0.1})
    material: dict = field(default_factory=lambda: {"E": 70.0, "nu": 0.3, "mode": "plane-stress"})
    dirichlet: list = field(default_factory=list)
    neumann: list = field(default_factory=list)
    body_force: object = None
    strategy: str = "pinn-fem"
    net: dict = field(default_factory=lambda: {"hidden": 32, "depth": 5})
    optim: dict = field(default_factory=dict)
    beta: float = 100.0
    seed: int = 0
    ground_truth: str = "fem-oracle"
    experiment: str = ""
    cantilever: dict = field(default_factory=dict)
    bar: dict = field(default_factory=dict)
    adf_mu: float = 1.0
    base_dir: str = ""

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError("strategy must be one of %s, got %r" % (", ".join(STRATEGIES), self.strategy))
        if self.ground_truth not in GROUND_TRUTHS:
            raise ConfigError("ground_truth must be one of %s, got %r"
                              % (", ".join(GROUND_TRUTHS), self.ground_truth))
        if self.ground_truth == "analytic-1d":
            if self.strategy != "pinn-fem":
                raise ConfigError("1D bar problems support the pinn-fem strategy only")
        elif not self.dirichlet:
            raise ConfigError("config %r has no Dirichlet conditions" % self.name)
        try:
            self.optim_config()
        except (TypeError, ValueError) as exc:
            raise ConfigError("bad optim section: %s" % exc) from None

    @classmethod
    def from_dict(cls, d, base_dir=""):
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known - {"$schema", "description"}
        if extra:
            raise ConfigError("unknown config keys: %s" % ", ".join(sorted(extra)))
        if "name" not in d:
            raise ConfigError("config needs a 'name'")
        kw = {k: v for k, v in d.items() if k in known}
        kw.setdefault("base_dir", str(base_dir))
        return cls(**kw)

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("cannot read config %s: %s" % (path, exc)) from None
        if not isinstance(data, dict):
            raise ConfigError("config %s must be a JSON object" % path)
        return cls.from_dict(data, base_dir=path.parent)

    def to_dict(self):
        d = asdict(self)
        d.pop("base_dir")
        return d

    # builders ----------------------------------------------------------------

    def material_obj(self):
        try:
            return Material(float(self.material["E"]), float(self.material["nu"]),
                            self.material.get("mode", "plane-stress"))
        except (KeyError, ValueError) as exc:
            raise ConfigError("bad material section: %s" % exc) from None

    def optim_config(self):
        opts = dict(self.optim)
        opts.setdefault("seed", self.seed)
        if opts.get("method", "lbfgs") == "adam":
            opts.setdefault("max_iterations", 5000)
        return OptimConfig(**opts)

    def mlp_spec(self, bounds=None):
        """Network spec; ``bounds`` = (lo, hi) of the domain, used when
        ``net.normalize_inputs`` is set."""
        n_in = 1 if self.ground_truth == "analytic-1d" else 2
        extra = set(self.net) - {"layers", "hidden", "depth", "normalize_inputs", "output_scale"}
        if extra:
            raise ConfigError("unknown net keys: %s" % ", ".join(sorted(extra)))
        if "layers" in self.net:
            layers = tuple(int(v) for v in self.net["layers"])
            if layers[0] != n_in or layers[-1] != n_in:
                raise ConfigError("net layers must start and end with %d, got %s" % (n_in, list(layers)))
        else:
            layers = (n_in,) + (int(self.net.get("hidden", 32)),) * int(self.net.get("depth", 5)) + (n_in,)
        try:
            spec = net.MlpSpec(layers, output_scale=float(self.net.get("output_scale", 1.0)))
            if self.net.get("normalize_inputs", False) and bounds is not None:
                spec = spec.with_bounds(*bounds)
        except ValueError as exc:
            raise ConfigError("bad net section: %s" % exc) from None
        return spec

    def build_mesh(self):
        m = self.mesh
        try:
            if "unit_square" in m:
                return structured_unit_square(float(m["unit_square"]))
            if "rectangle" in m:
                x0, x1, y0, y1, nx, ny = m["rectangle"]
                return structured_rectangle(float(x0), float(x1), float(y0), float(y1), int(nx), int(ny))
            if "fixture" in m:
                ref = resources.files("pinnfem") / "fixtures" / m["fixture"]
                with resources.as_file(ref) as p:
                    return read_msh(p)
            if "path" in m:
                p = Path(m["path"])
                if not p.is_absolute() and self.base_dir:
                    p = Path(self.base_dir) / p
                return read_msh(p)
        except FileNotFoundError as exc:
            raise ConfigError("mesh file not found: %s" % exc.filename) from None
        raise ConfigError("mesh section needs one of unit_square, rectangle, fixture, path: %r" % (m,))

    def dirichlet_specs(self, mesh):
        specs = []
        for entry in self.dirichlet:
            comps = _COMPONENTS.get(entry.get("components", "xy"))
            if comps is None:
                raise ConfigError("components must be 'x', 'y' or 'xy', got %r" % entry.get("components"))
            g = _vector_fn(entry.get("g", [0.0, 0.0]), "dirichlet g")
            keys = [k for k in ("tag", "where", "points", "nodes") if k in entry]
            if len(keys) != 1:
                raise ConfigError("each Dirichlet entry needs exactly one of tag/where/points/nodes: %r" % entry)
            key = keys[0]
            if key == "tag":
                sel = entry["tag"]
            elif key == "where":
                sel = compile_expr(entry["where"])
            elif key == "nodes":
                sel = [int(v) for v in entry["nodes"]]
            else:
                sel = nodes_at(mesh, entry["points"])
            specs.append(DirichletSpec(sel, g, comps))
        return specs

    def neumann_specs(self):
        return [NeumannSpec(e["tag"], _vector_fn(e.get("h", [0.0, 0.0]), "neumann h")) for e in self.neumann]

    def body_force_fn(self):
        return None if self.body_force is None else _vector_fn(self.body_force, "body_force")

    def cantilever_spec(self):
        c = dict(self.cantilever)
        mat = self.material_obj()
        L, D = float(c.get("L", 1.0)), float(c.get("D", 0.5))
        P = float(c.get("P", 20.0 * D ** 3 / 12.0))
        return CantileverSpec(L, D, P, mat)


def nodes_at(mesh, points, tol=1e-9):
    """Indices of the mesh nodes sitting on the given points."""
    out = []
    scale = max(mesh.diameter(), 1.0)
    for p in np.atleast_2d(np.asarray(points, dtype=np.float64)):
        d = np.hypot(*(mesh.nodes - p).T)
        hit = np.flatnonzero(d <= tol * scale)
        if hit.size == 0:
            raise ConfigError("no mesh node at point %s (nearest is %.3g away)" % (list(p), d.min()))
        out.extend(hit.tolist())
    return out


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def relative_l1(predicted, truth):
    """Per-component sum|pred - truth| / sum|truth| over nodes."""
    p = np.asarray(predicted, dtype=np.float64)
    t = np.asarray(truth, dtype=np.float64)
    if p.shape != t.shape:
        raise ValueError("shape mismatch %s vs %s" % (p.shape, t.shape))
    if p.ndim == 1:
        p, t = p[:, None], t[:, None]
    den = np.abs(t).sum(axis=0)
    if np.any(den == 0):
        raise UndefinedMetricError("relative error undefined: truth component %d is identically zero"
                                   % int(np.argmax(den == 0)))
    e = np.abs(p - t).sum(axis=0) / den
    return tuple(float(v) for v in e)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

@dataclass
class ExperimentReport:
    name: str
    experiment: str
    strategy: str
    errors: tuple
    energy: dict
    trace: dict
    wall_time: float
    config: dict
    seed: int = 0

    @property
    def e_ux(self):
        return self.errors[0]

    @property
    def e_uy(self):
        return self.errors[1] if len(self.errors) > 1 else float("nan")

    def to_json(self):
        d = {"name": self.name, "experiment": self.experiment, "strategy": self.strategy,
             "seed": self.seed, "errors": list(self.errors), "energy": self.energy,
             "trace": self.trace, "config": self.config}
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


@dataclass
class _Built:
    cfg: ExperimentConfig
    spec: net.MlpSpec
    mesh: object = None
    decomposition: object = None
    strategy: object = None
    functional: object = None
    bar: object = None

    def loss_grad(self):
        if self.bar is not None:
            return energy_1d_loss_and_grad(self.bar, self.spec)
        return self.functional.loss_and_grad

    def predict(self, theta):
        if self.bar is not None:
            return Bar1DField(self.spec, self.bar).nodal_values(theta)
        if self.strategy.name == "pinn-fem":
            return self.strategy.nodal_values(theta)
        return np.asarray(self.strategy.nodal_values(theta, self.mesh.nodes))

    def truth(self):
        cfg = self.cfg
        if cfg.ground_truth == "analytic-1d":
            return bar_1d_solution(**_bar_args(cfg.bar, solution=True))(self.bar.nodes)
        if cfg.ground_truth == "analytic-timoshenko":
            ux, uy = timoshenko_displacement(cfg.cantilever_spec(), *self.mesh.nodes.T)
            return np.column_stack([ux, uy])
        sol = solve_fem(self.mesh, cfg.material_obj(), cfg.dirichlet_specs(self.mesh),
                        cfg.neumann_specs(), cfg.body_force_fn())
        return sol.displacements

    def energy(self, theta):
        if self.bar is not None:
            from .energy import energy_1d
            return {"total": float(energy_1d(self.bar, self.spec, theta))}
        return self.functional.breakdown(theta).as_dict()


def _bar_args(bar, solution=False):
    d = {"case": bar.get("case", "one-end"), "f": float(bar.get("f", 0.0)), "h": float(bar.get("h", 0.0)),
         "g": float(bar.get("g", 0.0)), "g_left": float(bar.get("g_left", 0.0)),
         "g_right": float(bar.get("g_right", 0.0))}
    if not solution:
        d["n_cells"] = int(bar.get("n_cells", 50))
    return d


def build(cfg):
    if cfg.ground_truth == "analytic-1d":
        spec = cfg.mlp_spec(([0.0], [1.0]))
        return _Built(cfg, spec, bar=Bar1D(**_bar_args(cfg.bar)))
    mesh = cfg.build_mesh()
    spec = cfg.mlp_spec((mesh.nodes.min(axis=0), mesh.nodes.max(axis=0)))
    dec = decompose(mesh, cfg.dirichlet_specs(mesh), cfg.neumann_specs())
    strategy = make_strategy(cfg.strategy, spec, dec, mu=cfg.adf_mu)
    problem = Problem(dec, cfg.material_obj(), strategy, cfg.body_force_fn(), cfg.beta)
    return _Built(cfg, spec, mesh, dec, strategy, EnergyFunctional(problem))


def _report(built, theta, trace_summary, wall):
    cfg = built.cfg
    pred = built.predict(theta)
    errors = relative_l1(pred, built.truth())
    return ExperimentReport(cfg.name, cfg.experiment, cfg.strategy, errors, built.energy(theta),
                            trace_summary, wall, cfg.to_dict(), cfg.seed), pred


def write_outputs(report, built, theta, pred, out_dir, trace=None):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = report.name
    (out / (stem + ".report.json")).write_text(report.to_json(), encoding="utf-8")
    (out / (stem + ".timing.json")).write_text(json.dumps({"wall_time": report.wall_time}) + "\n",
                                               encoding="utf-8")
    truth = built.truth()
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if built.bar is not None:
        w.writerow(["node_id", "x", "u_pred", "u_true"])
        for i, x in enumerate(built.bar.nodes):
            w.writerow([i, repr(float(x)), repr(float(pred[i])), repr(float(truth[i]))])
    else:
        w.writerow(["node_id", "x", "y", "ux_pred", "uy_pred", "ux_true", "uy_true"])
        for i, p in enumerate(built.mesh.nodes):
            w.writerow([i] + [repr(float(v)) for v in (p[0], p[1], pred[i, 0], pred[i, 1],
                                                        truth[i, 0], truth[i, 1])])
    (out / (stem + ".fields.csv")).write_text(buf.getvalue(), encoding="utf-8")
    if trace is not None:
        (out / (stem + ".trace.csv")).write_text(trace.to_csv(), encoding="utf-8")
    net.save_checkpoint(out / (stem + ".ckpt"), built.spec, theta, seed=report.seed, config=report.name)


def train(cfg):
    """Build and train; returns (built, theta, trace)."""
    built = build(cfg)
    theta0 = net.init_params(built.spec, cfg.seed)
    theta, trace = minimize(built.loss_grad(), theta0, cfg.optim_config())
    log.info("%s: %s after %d iterations, loss %.6g", cfg.name, trace.status, len(trace) - 1, trace.final_loss)
    return built, theta, trace


def run_experiment(cfg, out_dir=None):
    t0 = time.perf_counter()
    built, theta, trace = train(cfg)
    wall = time.perf_counter() - t0
    report, pred = _report(built, theta, trace.summary(), wall)
    if out_dir is not None:
        write_outputs(report, built, theta, pred, out_dir, trace)
    return report


def evaluate_checkpoint(checkpoint, cfg, out_dir=None):
    spec, theta, meta = net.load_checkpoint(checkpoint)
    built = build(cfg)
    if spec != built.spec:
        raise ConfigError("checkpoint network %s does not match config %s"
                          % (spec.to_dict(), built.spec.to_dict()))
    report, pred = _report(built, theta, {"status": "evaluated"}, 0.0)
    if out_dir is not None:
        write_outputs(report, built, theta, pred, out_dir)
    return report


# ---------------------------------------------------------------------------
# the reproduction sweep
# ---------------------------------------------------------------------------

EXPERIMENTS = {
    "exp1": ("Square plate with constant stress", ("soft", "adf", "df", "pinn-fem")),
    "exp2": ("Square plate with a circular hole", ("soft", "adf", "pinn-fem")),
    "exp3": ("Square plate with discontinuous boundaries", ("soft", "adf", "pinn-fem")),
    "exp4": ("Square plate with point boundaries", ("soft", "pinn-fem")),
    "exp5": ("Square plate with a crack", ("soft", "adf", "df", "pinn-fem")),
    "exp6": ("Cantilever beam with parabolic traction", ("soft", "pinn-fem")),
}


def shipped_configs():
    """Sorted list of the packaged experiment config names."""
    root = resources.files("pinnfem") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def load_shipped(name):
    ref = resources.files("pinnfem") / "configs" / name
    with resources.as_file(ref) as p:
        return ExperimentConfig.load(p)


def sweep_configs():
    out = []
    for exp, (_, strategies) in EXPERIMENTS.items():
        for s in strategies:
            out.append(load_shipped("%s_%s.json" % (exp, s)))
    return out


def _checks(exp, rows):
    """Acceptance checks for one experiment's rows: strategy -> (passed, why)."""
    by = {r["strategy"]: r for r in rows if r.get("status") == "ok"}
    res = {}
    pf = by.get("pinn-fem")
    for s in (r["strategy"] for r in rows):
        r = by.get(s)
        if r is None:
            res[s] = (False, "run failed")
            continue
        ok, why = True, []
        if exp == "exp1":
            if s == "pinn-fem":
                ok = r["e_ux"] <= 0.05 and r["e_uy"] <= 0.08
                why.append("e_ux<=0.05, e_uy<=0.08")
            elif s in ("adf", "df"):
                ok = r["e_ux"] <= 0.08 and r["e_uy"] <= 0.08
                why.append("e<=0.08")
            elif pf is not None:
                ok = r["e_ux"] > pf["e_ux"]
                why.append("worse than pinn-fem on e_ux")
        elif exp == "exp6":
            if s == "pinn-fem":
                ok = r["e_ux"] <= 0.02 and r["e_uy"] <= 0.02
                why.append("e<=0.02")
            elif pf is not None:
                ok = r["e_ux"] >= 10 * pf["e_ux"] and r["e_uy"] >= 10 * pf["e_uy"]
                why.append(">=10x pinn-fem")
        else:
            if s == "pinn-fem":
                base = [v["e_ux"] for k, v in by.items() if k != "pinn-fem"]
                soft = by.get("soft")
                ok = (soft is None or r["e_ux"] <= soft["e_ux"]) and (not base or r["e_ux"] <= 1.5 * min(base))
                why.append("e_ux<=soft and <=1.5x best baseline")
            else:
                why.append("baseline")
        res[s] = (bool(ok), "; ".join(why))
    return res


SUMMARY_FIELDS = ["experiment", "title", "strategy", "e_ux", "e_uy", "status", "iterations", "check", "pass"]


def reproduce_all(out_dir, configs=None):
    """Run every (experiment, strategy) pair and write summary.csv/summary.md.

    Individual failures are recorded in the table and the sweep continues.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    configs = sweep_configs() if configs is None else configs
    rows = []
    for cfg in configs:
        row = {"experiment": cfg.experiment, "title": EXPERIMENTS.get(cfg.experiment, ("",))[0],
               "strategy": cfg.strategy}
        try:
            rep = run_experiment(cfg, out / "runs")
            row.update(e_ux=rep.e_ux, e_uy=rep.e_uy, status="ok", iterations=rep.trace.get("iterations", 0),
                       optimizer_status=rep.trace.get("status", ""))
        except (MeshError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
            log.error("%s failed: %s", cfg.name, exc)
            row.update(e_ux=float("nan"), e_uy=float("nan"), status="error: %s" % type(exc).__name__,
                       iterations=0)
        rows.append(row)
    for exp in dict.fromkeys(r["experiment"] for r in rows):
        group = [r for r in rows if r["experiment"] == exp]
        for s, (ok, why) in _checks(exp, group).items():
            for r in group:
                if r["strategy"] == s:
                    r["pass"] = "pass" if ok else "fail"
                    r["check"] = why
    _write_summary(out, rows)
    return rows


def _fmt(v):
    return "%.4g" % v if isinstance(v, float) else str(v)


def _write_summary(out, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for r in rows:
        w.writerow([_fmt(r.get(k, "")) for k in SUMMARY_FIELDS])
    (out / "summary.csv").write_text(buf.getvalue(), encoding="utf-8")

    lines = ["| Experiment | Model | e(ux) | e(uy) | Check | Result |", "|---|---|---|---|---|---|"]
    last = None
    for r in rows:
        title = r["title"] if r["experiment"] != last else ""
        last = r["experiment"]
        lines.append("| %s | %s | %s | %s | %s | %s |" % (title, r["strategy"], _fmt(r["e_ux"]), _fmt(r["e_uy"]),
                                                       r.get("check", ""), r.get("pass", "")))
    (out / "summary.md").write_text("\n".join(lines) + "\n", encoding="utf-8")
