"""Command-line entry point.

    pinnfem mesh-info FILE.msh
    pinnfem solve-fem CONFIG.json [--out fields.csv]
    pinnfem train CONFIG.json [--out DIR]
    pinnfem eval CHECKPOINT CONFIG.json [--out DIR]
    pinnfem reproduce-all DIR

Exit status: 0 on success, 1 when an experiment fails, 2 for a bad config.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .experiments import ConfigError, ExperimentConfig, evaluate_checkpoint, reproduce_all, run_experiment
from .femref import solve_fem
from .mesh import MeshError, read_msh
from .net import NonFiniteLossError

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("pinnfem")


def _config(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigError("config file not found: %s" % p)
    return ExperimentConfig.load(p)


def cmd_mesh_info(args):
    try:
        mesh = read_msh(args.file)
    except FileNotFoundError:
        raise ConfigError("mesh file not found: %s" % args.file) from None
    lo, hi = mesh.nodes.min(axis=0), mesh.nodes.max(axis=0)
    print("nodes      %d" % mesh.n_nodes)
    print("triangles  %d" % mesh.n_triangles)
    print("edges      %d" % len(mesh.edges))
    print("area       %.6g" % mesh.areas().sum())
    print("bounds     [%g, %g] x [%g, %g]" % (lo[0], hi[0], lo[1], hi[1]))
    for tag in mesh.tags:
        print("tag %-8s %d edges" % (tag, sum(t == tag for t in mesh.edge_tags)))
    return EXIT_OK


def cmd_solve_fem(args):
    cfg = _config(args.config)
    if cfg.ground_truth == "analytic-1d":
        raise ConfigError("solve-fem needs a 2D config")
    mesh = cfg.build_mesh()
    sol = solve_fem(mesh, cfg.material_obj(), cfg.dirichlet_specs(mesh), cfg.neumann_specs(), cfg.body_force_fn())
    text = sol.to_csv()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        u = sol.displacements
        print("max |ux| %.6g  max |uy| %.6g  -> %s" % (np.abs(u[:, 0]).max(), np.abs(u[:, 1]).max(), args.out))
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _print_report(rep):
    errs = "  ".join("%s %.4g" % (k, v) for k, v in zip(("e(ux)", "e(uy)"), rep.errors))
    status = rep.trace.get("status", "")
    print("%s [%s] %s %s" % (rep.name, rep.strategy, errs, status))


def cmd_train(args):
    cfg = _config(args.config)
    rep = run_experiment(cfg, args.out)
    _print_report(rep)
    return EXIT_OK


def cmd_eval(args):
    cfg = _config(args.config)
    if not Path(args.checkpoint).is_file():
        raise ConfigError("checkpoint not found: %s" % args.checkpoint)
    rep = evaluate_checkpoint(args.checkpoint, cfg, args.out)
    _print_report(rep)
    return EXIT_OK


def cmd_reproduce_all(args):
    rows = reproduce_all(args.dir)
    print((Path(args.dir) / "summary.md").read_text(encoding="utf-8"), end="")
    return EXIT_FAILED if any(r["status"] != "ok" for r in rows) else EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="pinnfem", description="Energy-trained networks with an FE boundary layer.")
    p.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mesh-info", help="summarise an MSH 2.2 file")
    s.add_argument("file")
    s.set_defaults(func=cmd_mesh_info)

    s = sub.add_parser("solve-fem", help="solve a config with the reference FEM solver")
    s.add_argument("config")
    s.add_argument("--out", help="write node_id,x,y,ux,uy CSV here instead of stdout")
    s.set_defaults(func=cmd_solve_fem)

    s = sub.add_parser("train", help="train one experiment config")
    s.add_argument("config")
    s.add_argument("--out", help="directory for report, fields, trace and checkpoint")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("eval", help="evaluate a saved checkpoint against a config's ground truth")
    s.add_argument("checkpoint")
    s.add_argument("config")
    s.add_argument("--out")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("reproduce-all", help="run every experiment and strategy, write summary tables")
    s.add_argument("dir")
    s.set_defaults(func=cmd_reproduce_all)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print("config error: %s" % exc, file=sys.stderr)
        return EXIT_CONFIG
    except (MeshError, NonFiniteLossError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        print("%s: %s" % (type(exc).__name__, exc), file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
