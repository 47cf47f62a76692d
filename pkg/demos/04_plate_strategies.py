"""The four boundary strategies on the constant-stress plate, on a short
budget so the script finishes in under a minute.

The full-budget comparison is ``pinnfem reproduce-all OUT``.
"""
from pinnfem.experiments import ExperimentConfig, load_shipped, run_experiment

for strategy in ("soft", "adf", "df", "pinn-fem"):
    d = load_shipped("exp1_%s.json" % strategy).to_dict()
    d["optim"] = dict(d["optim"], max_iterations=100 if d["optim"]["method"] == "lbfgs" else 1000)
    rep = run_experiment(ExperimentConfig.from_dict(d))
    print("%-9s e(ux) %.4f  e(uy) %.4f  %s" % (strategy, rep.e_ux, rep.e_uy, rep.trace["status"]))
