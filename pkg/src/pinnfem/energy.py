"""Total potential energy used as the training loss.

For a 2D problem the loss is split into

* ``e_nn``    strain energy minus body-force work over the network region,
              one centroid point per triangle;
* ``e_fe``    the same over the FE boundary layer, with the blended (CST)
              field, whose strain is constant per triangle;
* ``e_h``     minus the traction work on Neumann edges (midpoint rule);
* ``penalty`` beta * squared Dirichlet misfit at boundary nodes (soft only).

Strategies without an FE layer integrate ``e_nn`` over every triangle.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import net
from .elasticity import energy_densities, stiffness_matrix, voigt_strains
from .mesh import _eval_vector
from .net import NonFiniteLossError
from .tape import Var, value_of


@dataclass(frozen=True)
class EnergyBreakdown:
    e_nn: float
    e_fe: float
    e_h: float
    penalty: float
    total: float

    def as_dict(self):
        return {"e_nn": self.e_nn, "e_fe": self.e_fe, "e_h": self.e_h,
                "penalty": self.penalty, "total": self.total}


@dataclass
class Problem:
    """A 2D linear-elastic problem bound to a field strategy."""
    decomposition: object
    material: object
    strategy: object
    body_force: Optional[Callable] = None   # f(x, y) -> (fx, fy), N/mm^3
    beta: float = 100.0

    @property
    def mesh(self):
        return self.decomposition.mesh


def _check_finite(values, points, what):
    v = value_of(values)
    bad = ~np.isfinite(v)
    if bad.ndim > 1:
        bad = bad.reshape(len(bad), -1).any(axis=1)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise NonFiniteLossError("non-finite %s contribution at point %d %s" % (what, i, points[i]),
                                 point=np.asarray(points[i]).copy(), index=i)


class EnergyFunctional:
    """Precomputed quadrature for one Problem; evaluates terms for any theta."""

    def __init__(self, problem):
        self.problem = problem
        dec = problem.decomposition
        mesh = dec.mesh
        strategy = problem.strategy
        self.C = stiffness_matrix(problem.material)
        centroids = mesh.centroids()
        areas = mesh.areas()

        if strategy.uses_fe_layer:
            interior = dec.nn_elements
        else:
            interior = np.arange(mesh.n_triangles)
        self.nn_points = centroids[interior]
        self.nn_areas = areas[interior]
        self.nn_field = strategy.prepare(self.nn_points, interior) if len(interior) else None

        self.fe_field = None
        if strategy.uses_fe_layer and len(dec.fe_elements):
            self.fe_points = centroids[dec.fe_elements]
            self.fe_areas = areas[dec.fe_elements]
            self.fe_field = strategy.prepare(self.fe_points, dec.fe_elements)

        nm = dec.neumann
        self.neumann = nm
        self.h_field = strategy.prepare(nm.midpoints, nm.elements, jacobian=False) if len(nm) else None

        self.f_nn = self.f_fe = None
        if problem.body_force is not None:
            self.f_nn = _eval_vector(problem.body_force, self.nn_points)
            if self.fe_field is not None:
                self.f_fe = _eval_vector(problem.body_force, self.fe_points)

        self.penalty_field = None
        if strategy.name == "soft":
            nodes = dec.dirichlet_nodes
            self.pen_nodes = nodes
            self.pen_mask = dec.dirichlet_mask[nodes].astype(np.float64)
            self.pen_g = np.where(dec.dirichlet_mask[nodes], dec.dirichlet_values[nodes], 0.0)
            if len(nodes):
                self.penalty_field = strategy.prepare(mesh.nodes[nodes], None, jacobian=False)

    # individual terms, Var-aware -------------------------------------------

    def _region(self, field, theta, points, areas, f):
        u, J = field(theta)
        dens = energy_densities(voigt_strains(J), self.C)
        _check_finite(dens, points, "strain energy")
        integrand = dens
        if f is not None:
            integrand = integrand - (u * f).sum(axis=1)
        return (integrand * areas).sum()

    def interior(self, theta):
        if self.nn_field is None:
            return 0.0
        return self._region(self.nn_field, theta, self.nn_points, self.nn_areas, self.f_nn)

    def fe_layer(self, theta):
        if self.fe_field is None:
            return 0.0
        return self._region(self.fe_field, theta, self.fe_points, self.fe_areas, self.f_fe)

    def traction(self, theta):
        if self.h_field is None:
            return 0.0
        u = self.h_field(theta)
        _check_finite(u, self.neumann.midpoints, "traction")
        return -((u * self.neumann.tractions).sum(axis=1) * self.neumann.lengths).sum()

    def penalty(self, theta, beta=None):
        if self.penalty_field is None:
            return 0.0
        beta = self.problem.beta if beta is None else beta
        u = self.penalty_field(theta)
        r = (u - self.pen_g) * self.pen_mask
        return (r * r).sum() * beta

    def terms(self, theta):
        return self.interior(theta), self.fe_layer(theta), self.traction(theta), self.penalty(theta)

    # public evaluation -----------------------------------------------------

    def breakdown(self, theta):
        vals = [float(value_of(t)) for t in self.terms(np.asarray(theta, dtype=np.float64))]
        e_nn, e_fe, e_h, pen = vals
        return EnergyBreakdown(e_nn, e_fe, e_h, pen, e_nn + e_fe + e_h + pen)

    def loss(self, theta):
        a, b, c, d = self.terms(theta)
        return ((a + b) + c) + d

    def loss_and_grad(self, theta):
        return net.loss_gradient(self.loss, theta)


def _functional(ps):
    return ps if isinstance(ps, EnergyFunctional) else EnergyFunctional(ps)


def interior_energy(ps, theta):
    return float(value_of(_functional(ps).interior(theta)))


def fe_layer_energy(ps, theta):
    return float(value_of(_functional(ps).fe_layer(theta)))


def traction_energy(ps, theta):
    return float(value_of(_functional(ps).traction(theta)))


def soft_penalty(ps, theta, beta=None):
    return float(value_of(_functional(ps).penalty(theta, beta)))


def total_loss(ps, theta):
    return _functional(ps).breakdown(theta)


# ---------------------------------------------------------------------------
# one-dimensional bar
# ---------------------------------------------------------------------------

ONE_END = "one-end"
BOTH_ENDS = "both-ends"


@dataclass
class Bar1D:
    """u'' + f = 0 on (0, 1).

    ``one-end``: -u'(0) = h, u(1) = g. ``both-ends``: u(0) = g_left,
    u(1) = g_right. The interval is cut into ``n_cells`` equal cells; the
    cell touching each Dirichlet end is a two-node linear element and the
    network covers the rest, sampled at cell midpoints.
    """
    case: str = ONE_END
    f: object = 0.0
    h: float = 0.0
    g: float = 0.0
    g_left: float = 0.0
    g_right: float = 0.0
    n_cells: int = 50

    def __post_init__(self):
        if self.case not in (ONE_END, BOTH_ENDS):
            raise ValueError("case must be %r or %r" % (ONE_END, BOTH_ENDS))
        if self.n_cells < 3:
            raise ValueError("need at least 3 cells")

    @property
    def nodes(self):
        return np.linspace(0.0, 1.0, self.n_cells + 1)

    def fe_cells(self):
        """(cell index, prescribed node position 0|1, prescribed value) per FE element."""
        n = self.n_cells
        if self.case == ONE_END:
            return [(n - 1, 1, self.g)]
        return [(0, 0, self.g_left), (n - 1, 1, self.g_right)]

    def body(self, x):
        if callable(self.f):
            return np.asarray(self.f(x), dtype=np.float64) * np.ones_like(x)
        return float(self.f) * np.ones_like(x)


class Bar1DField:
    """Blended 1D field: linear elements at the Dirichlet ends, network elsewhere."""
    name = "pinn-fem"

    def __init__(self, spec, bar):
        self.spec = spec
        self.bar = bar

    def nodal_values(self, theta):
        x = self.bar.nodes
        u = np.asarray(net.forward(self.spec, theta, x.reshape(-1, 1)))[:, 0]
        for cell, side, value in self.bar.fe_cells():
            u[cell + side] = value
        return u


def energy_1d(bar, spec, theta, field=None):
    """Discrete potential energy of the 1D bar (float or tape Var).

    ``field`` optionally replaces the network by ``x -> (u, du/dx)`` on
    arrays of points, for evaluating the functional on prescribed fields.
    """
    x = bar.nodes
    dx = x[1] - x[0]
    fe = bar.fe_cells()
    fe_ids = {c for c, _, _ in fe}
    nn_cells = np.array([c for c in range(bar.n_cells) if c not in fe_ids])
    mids = 0.5 * (x[nn_cells] + x[nn_cells + 1])

    def evaluate(pts, jac):
        if field is not None:
            u, du = field(pts)
            return (u, du) if jac else u
        if jac:
            u, J = net.forward_with_jacobian(spec, theta, pts.reshape(-1, 1))
            return u[:, 0], J[:, 0, 0]
        return net.forward(spec, theta, pts.reshape(-1, 1))[:, 0]

    u, du = evaluate(mids, True)
    _check_finite(du, mids, "strain energy")
    e_nn = ((du * du * 0.5 - u * bar.body(mids)) * dx).sum()

    # nodal values for the FE elements: network at the interface node
    iface = np.array([c + (1 - side) for c, side, _ in fe], dtype=float) * dx
    u_iface = evaluate(iface, False)
    e_fe = 0.0
    for k, (cell, side, value) in enumerate(fe):
        ui = u_iface[k]
        left, right = (value, ui) if side == 0 else (ui, value)
        slope = (right - left) * (1.0 / dx)
        xc = x[cell] + 0.5 * dx
        e_fe = e_fe + (slope * slope * 0.5 - (left + right) * (0.5 * float(bar.body(np.array([xc]))[0]))) * dx

    e_h = 0.0
    if bar.case == ONE_END and bar.h != 0.0:
        u0 = evaluate(np.array([0.0]), False)
        e_h = -(u0 * bar.h).sum()
    return (e_nn + e_fe) + e_h


def energy_1d_loss_and_grad(bar, spec):
    def loss_grad(theta):
        return net.loss_gradient(lambda th: energy_1d(bar, spec, th), theta)
    return loss_grad
