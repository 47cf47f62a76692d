"""Reference solutions: the CST solver against closed forms.

Run with ``python demos/01_reference_solver.py``.
"""
import numpy as np

from pinnfem.analytic import timoshenko_displacement
from pinnfem.elasticity import Material
from pinnfem.experiments import load_shipped
from pinnfem.femref import interpolate, solve_fem
from pinnfem.mesh import DirichletSpec, NeumannSpec, structured_unit_square

# %% A unit plate pulled to the right with unit traction. Rollers on the
# left and bottom edges leave a uniform uniaxial state, which linear
# triangles reproduce exactly.
mesh = structured_unit_square(0.1)
plate = Material(70.0, 0.3)
rollers = [DirichletSpec("left", components=(True, False)),
           DirichletSpec("bottom", components=(False, True))]
sol = solve_fem(mesh, plate, rollers, [NeumannSpec("right", (1.0, 0.0))])

x, y = mesh.nodes.T
exact = np.column_stack([x / 70.0, -0.3 * y / 70.0])
print("plate: %d nodes, max deviation from uniaxial state %.2e"
      % (mesh.n_nodes, np.abs(sol.displacements - exact).max()))
print("strain energy %.6f (half the external work is %.6f)" % (sol.strain_energy(), 0.5 / 70.0))

# %% The cantilever is a harder test: bending is not constant strain, so
# the error falls with refinement instead of vanishing.
cfg = load_shipped("exp6_pinn-fem.json")
spec = cfg.cantilever_spec()
tip_exact = timoshenko_displacement(spec, 1.0, 0.0)[1]
print("\ncantilever tip deflection, exact %.6f" % tip_exact)
for nx, ny in [(10, 6), (20, 10), (40, 20)]:
    cfg.mesh = {"rectangle": [0.0, 1.0, -0.25, 0.25, nx, ny]}
    m = cfg.build_mesh()
    s = solve_fem(m, cfg.material_obj(), cfg.dirichlet_specs(m), cfg.neumann_specs())
    tip = interpolate(s, [1.0, 0.0])[1]
    print("  %3d x %-3d mesh: %.6f  (%.2f%% off)" % (nx, ny, tip, 100 * abs(tip / tip_exact - 1)))
