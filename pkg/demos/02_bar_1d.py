"""A 1D bar trained with the blended field.

The element touching each Dirichlet end is an ordinary linear element
whose prescribed node carries the boundary value, so the condition holds
for any network weights. The rest of the bar is the raw network.
"""
import numpy as np

from pinnfem import net
from pinnfem.analytic import bar_1d_solution
from pinnfem.energy import Bar1DField
from pinnfem.experiments import build, load_shipped, run_experiment

cfg = load_shipped("bar_one_end.json")
built = build(cfg)

# %% Before training: the right end already sits at g = 0.
theta0 = net.init_params(built.spec, cfg.seed)
u0 = Bar1DField(built.spec, built.bar).nodal_values(theta0)
print("untrained: u(0) = %+.4f, u(1) = %+.4f" % (u0[0], u0[-1]))

# %% Train with L-BFGS and compare against u = (1 - x^2) / 2.
rep = run_experiment(cfg)
print("one end:   relative L1 error %.2e after %d iterations (%s)"
      % (rep.e_ux, rep.trace["iterations"], rep.trace["status"]))

rep = run_experiment(load_shipped("bar_both_ends.json"))
print("both ends: relative L1 error %.2e after %d iterations"
      % (rep.e_ux, rep.trace["iterations"]))

exact = bar_1d_solution(f=1.0)
print("\n  x     exact")
for x in np.linspace(0, 1, 5):
    print("  %.2f  %.5f" % (x, exact(x)))
