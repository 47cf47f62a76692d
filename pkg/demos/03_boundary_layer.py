"""What the FE boundary layer looks like, and why it enforces Dirichlet
conditions exactly."""
import numpy as np

from pinnfem import net
from pinnfem.experiments import build, load_shipped

# %% The cracked plate, clamped on its left edge and pulled on its right.
cfg = load_shipped("exp5_pinn-fem.json")
built = build(cfg)
dec = built.decomposition
mesh = dec.mesh
print("mesh: %d nodes, %d triangles" % (mesh.n_nodes, mesh.n_triangles))
print("boundary layer: %d triangles, %d interface nodes"
      % (len(dec.fe_elements), len(dec.interface_nodes)))

# %% Whatever the weights, every constrained component equals g.
rng = np.random.default_rng(0)
worst = 0.0
for k in range(20):
    theta = rng.normal(scale=3.0, size=built.spec.n_params)
    u = built.predict(theta)
    worst = max(worst, np.abs(u[dec.dirichlet_mask] - dec.dirichlet_values[dec.dirichlet_mask]).max())
print("largest Dirichlet violation over 20 random networks: %g" % worst)

# %% A soft penalty gives no such guarantee.
soft = build(load_shipped("exp5_soft.json"))
u = soft.predict(net.init_params(soft.spec, 0))
print("soft field at the clamped nodes, untrained: max |u| = %.3g"
      % np.abs(u[dec.dirichlet_mask]).max())
