"""Linear constant-strain-triangle FEM solver used as the reference solution."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, eigvalsh

from .elasticity import energy_densities, stiffness_matrix
from .mesh import MissingTagError, _eval_vector, dirichlet_arrays


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, message, n_modes=0):
        super().__init__(message)
        self.n_modes = n_modes


def b_matrices(mesh):
    """Strain-displacement matrices (m, 3, 6) for every triangle.

    Columns follow the DOF order (ux0, uy0, ux1, uy1, ux2, uy2).
    """
    G = mesh.shape_gradients()                      # (m, 3, 2)
    m = len(G)
    B = np.zeros((m, 3, 6))
    B[:, 0, 0::2] = G[:, :, 0]
    B[:, 1, 1::2] = G[:, :, 1]
    B[:, 2, 0::2] = G[:, :, 1]
    B[:, 2, 1::2] = G[:, :, 0]
    return B


def element_dofs(mesh):
    t = mesh.triangles
    return np.stack([2 * t, 2 * t + 1], axis=2).reshape(len(t), 6)


def assemble_stiffness(mesh, material):
    C = stiffness_matrix(material)
    B = b_matrices(mesh)
    Ke = mesh.areas()[:, None, None] * np.einsum("eki,kl,elj->eij", B, C, B)
    dofs = element_dofs(mesh)
    n = 2 * mesh.n_nodes
    K = np.zeros((n, n))
    np.add.at(K, (dofs[:, :, None], dofs[:, None, :]), Ke)
    return K


def assemble_load(mesh, neumann=(), body_force=None):
    F = np.zeros(2 * mesh.n_nodes)
    tags = np.array(mesh.edge_tags, dtype=object)
    for spec in neumann:
        ks = np.flatnonzero(tags == spec.tag)
        if ks.size == 0:
            raise MissingTagError("mesh has no boundary edges tagged %r (tags: %s)" % (spec.tag, mesh.tags))
        ij = mesh.edges[ks]
        a, b = mesh.nodes[ij[:, 0]], mesh.nodes[ij[:, 1]]
        L = np.hypot(*(b - a).T)
        # midpoint value of h, split evenly between the two end nodes
        share = _eval_vector(spec.h, 0.5 * (a + b)) * (0.5 * L)[:, None]
        for end in (0, 1):
            np.add.at(F, 2 * ij[:, end], share[:, 0])
            np.add.at(F, 2 * ij[:, end] + 1, share[:, 1])
    if body_force is not None:
        f = _eval_vector(body_force, mesh.centroids())
        share = f * (mesh.areas() / 3.0)[:, None]
        for a in range(3):
            nodes = mesh.triangles[:, a]
            np.add.at(F, 2 * nodes, share[:, 0])
            np.add.at(F, 2 * nodes + 1, share[:, 1])
    return F


@dataclass(frozen=True, eq=False)
class FemSolution:
    mesh: object
    displacements: np.ndarray       # (n_nodes, 2)
    material: object = None

    def strains(self):
        u = self.displacements.reshape(-1)[element_dofs(self.mesh)]
        return np.einsum("eij,ej->ei", b_matrices(self.mesh), u)

    def strain_energy(self):
        C = stiffness_matrix(self.material)
        return float((energy_densities(self.strains(), C) * self.mesh.areas()).sum())

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["node_id", "x", "y", "ux", "uy"])
        for i, (p, u) in enumerate(zip(self.mesh.nodes, self.displacements)):
            w.writerow([i, repr(float(p[0])), repr(float(p[1])), repr(float(u[0])), repr(float(u[1]))])
        return buf.getvalue()


def _count_zero_pivots(K, tol=1e-10):
    ev = eigvalsh(K)
    scale = max(float(np.abs(ev).max()), 1e-300)
    return int((ev < tol * scale).sum())


def solve_fem(mesh, material, dirichlet, neumann=(), body_force=None):
    """Solve K u = F with Dirichlet rows/columns eliminated."""
    K = assemble_stiffness(mesh, material)
    F = assemble_load(mesh, neumann, body_force)
    mask, values = dirichlet_arrays(mesh, dirichlet)
    fixed = mask.reshape(-1)
    u = np.where(fixed, values.reshape(-1), 0.0)
    free = np.flatnonzero(~fixed)
    if free.size:
        Kff = K[np.ix_(free, free)]
        rhs = F[free] - K[np.ix_(free, np.flatnonzero(fixed))] @ u[fixed]
        try:
            factor = cho_factor(Kff)
            n_bad = int((np.abs(np.diag(factor[0])) ** 2 < 1e-12 * np.abs(np.diag(Kff)).max()).sum())
        except LinAlgError:
            n_bad = max(_count_zero_pivots(Kff), 1)
        if n_bad:
            raise SingularSystemError(
                "constrained stiffness is singular: %d rigid-body mode(s) left unconstrained" % n_bad,
                n_modes=n_bad)
        u[free] = cho_solve(factor, rhs)
    return FemSolution(mesh, u.reshape(-1, 2), material)


def interpolate(sol, x):
    """Linear (barycentric) interpolation of a FemSolution at points."""
    pts = np.atleast_2d(np.asarray(x, dtype=np.float64))
    elems = sol.mesh.locate(pts)          # raises OutOfDomainError
    lam = sol.mesh.barycentric(pts, elems)
    vals = sol.displacements[sol.mesh.triangles[elems]]          # (n, 3, 2)
    out = np.einsum("na,nac->nc", lam, vals)
    return out[0] if np.ndim(x) == 1 else out
