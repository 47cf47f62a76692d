"""Displacement fields built on the network, one per Dirichlet treatment.

``soft``      raw network; Dirichlet data enters the loss as a penalty
``df``        per-component coordinate multiplier, u_c = m_c(x) N_c + offset_c
``adf``       R-function distance to the Dirichlet segments, u = phi N + g
``pinn-fem``  CST interpolation of nodal values inside the FE boundary layer
              (prescribed g at Dirichlet components, network values
              elsewhere) and the raw network in the interior

Each strategy precomputes everything that does not depend on the network
parameters in :meth:`prepare`, which returns a callable ``theta -> (u, J)``.
The callable accepts plain arrays or tape Vars.
"""
from __future__ import annotations

import numpy as np

from . import net
from .mesh import MeshError
from .tape import Var, concat, value_of

STRATEGIES = ("soft", "df", "adf", "pinn-fem")


class StrategyUnavailableError(ValueError):
    pass


class OutOfElementError(MeshError):
    pass


def _stack_jacobian_rows(cols, n):
    """(n, 2) columns dJ/dx_j -> (n, 2, 2); Var-aware."""
    if any(isinstance(c, Var) for c in cols):
        return concat([c.reshape(n, 2, 1) for c in cols], axis=2)
    return np.stack(cols, axis=2)


class _Prepared:
    def __init__(self, fn, jacobian):
        self._fn = fn
        self.jacobian = jacobian

    def __call__(self, theta):
        return self._fn(theta)


class SoftField:
    name = "soft"
    uses_fe_layer = False

    def __init__(self, spec):
        self.spec = spec

    def prepare(self, points, elements=None, jacobian=True):
        pts = np.asarray(points, dtype=np.float64)
        if jacobian:
            return _Prepared(lambda th: net.forward_with_jacobian(self.spec, th, pts), True)
        return _Prepared(lambda th: net.forward(self.spec, th, pts), False)

    def nodal_values(self, theta, nodes):
        return net.forward(self.spec, theta, nodes)


class DistanceField:
    """u_c = m_c(x) N_c(x) + offset_c with affine multipliers.

    ``multipliers[c] = (a, b, d)`` encodes m_c = a x + b y + d; ``None``
    leaves component c unconstrained (m_c = 1, offset 0).
    """
    name = "df"
    uses_fe_layer = False

    def __init__(self, spec, multipliers, offsets=(0.0, 0.0)):
        self.spec = spec
        self.multipliers = tuple(None if m is None else tuple(float(v) for v in m) for m in multipliers)
        self.offsets = np.asarray(offsets, dtype=np.float64)

    @classmethod
    def from_decomposition(cls, spec, dec, tol=1e-9):
        """Pick a coordinate line x = x0 or y = y0 whose mesh nodes are exactly
        the Dirichlet nodes of each constrained component."""
        nodes = dec.mesh.nodes
        mults, offsets = [], []
        for c in range(2):
            constrained = np.flatnonzero(dec.dirichlet_mask[:, c])
            if constrained.size == 0:
                mults.append(None)
                offsets.append(0.0)
                continue
            found = None
            for axis in (0, 1):
                v = nodes[constrained, axis]
                if np.ptp(v) > tol:
                    continue
                on_line = np.flatnonzero(np.abs(nodes[:, axis] - v.mean()) <= tol)
                if np.array_equal(on_line, constrained):
                    found = (axis, float(v.mean()))
                    break
            if found is None:
                raise StrategyUnavailableError(
                    "distance-function strategy needs each constrained component to cover a whole "
                    "coordinate line; component %d is prescribed on a discontinuous or point set" % c)
            g = dec.dirichlet_values[constrained, c]
            if np.ptp(g) > tol:
                raise StrategyUnavailableError("distance-function strategy needs constant prescribed values")
            axis, v0 = found
            mults.append((1.0, 0.0, -v0) if axis == 0 else (0.0, 1.0, -v0))
            offsets.append(float(g[0]))
        return cls(spec, mults, offsets)

    def _multiplier(self, pts):
        n = len(pts)
        m = np.ones((n, 2))
        dm = np.zeros((n, 2, 2))   # dm[:, c, j] = d m_c / d x_j
        for c, coef in enumerate(self.multipliers):
            if coef is None:
                continue
            a, b, d = coef
            m[:, c] = a * pts[:, 0] + b * pts[:, 1] + d
            dm[:, c, 0] = a
            dm[:, c, 1] = b
        return m, dm

    def prepare(self, points, elements=None, jacobian=True):
        pts = np.asarray(points, dtype=np.float64)
        m, dm = self._multiplier(pts)
        off = self.offsets
        n = len(pts)

        def values(th):
            return m * net.forward(self.spec, th, pts) + off

        def with_jac(th):
            N, JN = net.forward_with_jacobian(self.spec, th, pts)
            u = m * N + off
            cols = [N * dm[:, :, j] + m * JN[:, :, j] for j in range(2)]
            return u, _stack_jacobian_rows(cols, n)

        return _Prepared(with_jac if jacobian else values, jacobian)

    def nodal_values(self, theta, nodes):
        return self.prepare(nodes, jacobian=False)(theta)


# ---------------------------------------------------------------------------
# approximate distance functions
# ---------------------------------------------------------------------------

def adf_segment(x, a, b):
    """Normalised approximate distance from points ``x`` (..., 2) to the
    segment [a, b]: zero on the segment, positive elsewhere, unit normal
    derivative when approaching the open segment."""
    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    d = b - a
    L = float(np.hypot(*d))
    if L == 0.0:
        raise ValueError("degenerate segment: both endpoints are %s" % (a,))
    c = 0.5 * (a + b)
    f = ((x[..., 0] - a[0]) * d[1] - (x[..., 1] - a[1]) * d[0]) / L
    r = x - c
    t = ((0.5 * L) ** 2 - (r[..., 0] ** 2 + r[..., 1] ** 2)) / L
    varphi = np.sqrt(t * t + f ** 4)
    return np.sqrt(f * f + (0.25 * (varphi - t) ** 2))


def adf_combine(phis, mu=1.0):
    """R-equivalence join (sum phi_i^-mu)^(-1/mu); exactly 0 if any phi_i is 0."""
    phis = np.asarray(phis, dtype=np.float64)
    if phis.ndim == 1:
        phis = phis[:, None]
        squeeze = True
    else:
        squeeze = False
    out = np.zeros(phis.shape[1:])
    ok = np.all(phis > 0, axis=0)
    if np.any(ok):
        out[ok] = np.sum(phis[:, ok] ** (-mu), axis=0) ** (-1.0 / mu)
    return out[0] if squeeze else out


def adf_weights(phis, mu=1.0):
    """Inverse-distance weights of each piece; sum to one. Where pieces have
    phi = 0 the first such piece takes the full weight."""
    phis = np.asarray(phis, dtype=np.float64)
    squeeze = phis.ndim == 1
    if squeeze:
        phis = phis[:, None]
    w = np.zeros_like(phis)
    zero = phis == 0.0
    hit = zero.any(axis=0)
    first = np.argmax(zero, axis=0)
    cols = np.flatnonzero(hit)
    w[first[cols], cols] = 1.0
    ok = ~hit
    if np.any(ok):
        inv = phis[:, ok] ** (-mu)
        w[:, ok] = inv / inv.sum(axis=0)
    return w[:, 0] if squeeze else w


def boundary_segments(mesh, node_mask, values=None, merge=True, tol=1e-9):
    """Boundary edges with both endpoints in ``node_mask``, as (a, b) node pairs.

    With ``merge`` chains of collinear edges through nodes of degree two are
    fused into single segments, provided ``values`` (per-node prescribed data)
    is linear along the chain. Also returns masked nodes covered by no edge.
    """
    segs = [(int(i), int(j)) for i, j in mesh.edges if node_mask[i] and node_mask[j]]
    covered = np.zeros(mesh.n_nodes, dtype=bool)
    for i, j in segs:
        covered[i] = covered[j] = True
    orphans = np.flatnonzero(node_mask & ~covered)
    if not merge:
        return segs, orphans
    P = mesh.nodes
    vals = np.zeros(mesh.n_nodes) if values is None else np.asarray(values, dtype=np.float64)
    changed = True
    while changed:
        changed = False
        incident = {}
        for s, (i, j) in enumerate(segs):
            incident.setdefault(i, []).append(s)
            incident.setdefault(j, []).append(s)
        for k, ss in incident.items():
            if len(ss) != 2:
                continue
            p = segs[ss[0]][0] if segs[ss[0]][1] == k else segs[ss[0]][1]
            q = segs[ss[1]][0] if segs[ss[1]][1] == k else segs[ss[1]][1]
            u, v = P[k] - P[p], P[q] - P[k]
            lu, lv = np.hypot(*u), np.hypot(*v)
            if abs(u[0] * v[1] - u[1] * v[0]) > tol * lu * lv or np.dot(u, v) <= 0:
                continue
            s_k = lu / (lu + lv)
            if abs(vals[p] + s_k * (vals[q] - vals[p]) - vals[k]) > tol * (1.0 + abs(vals[k])):
                continue
            first = segs[ss[0]]
            a, b = (p, q) if first[1] == k else (q, p)
            segs = [seg for t, seg in enumerate(segs) if t not in ss] + [(a, b)]
            changed = True
            break
    return segs, orphans


class ApproxDistanceField:
    """u_c = phi_c(x) N_c(x) + g_c(x) with R-function distances per component.

    ``pieces[c]`` lists ``(a, b, ga, gb)``: segment endpoints and the
    prescribed component value at each end (linear in between). An empty
    list leaves component c free.
    """
    name = "adf"
    uses_fe_layer = False

    def __init__(self, spec, pieces, mu=1.0, fd_step=1e-6):
        self.spec = spec
        self.pieces = tuple(tuple((np.asarray(a, float), np.asarray(b, float), float(ga), float(gb))
                                  for a, b, ga, gb in comp) for comp in pieces)
        self.mu = float(mu)
        self.fd_step = float(fd_step)

    @classmethod
    def from_decomposition(cls, spec, dec, mu=1.0, fd_rel_step=1e-6):
        mesh = dec.mesh
        pieces = []
        for c in range(2):
            mask = dec.dirichlet_mask[:, c]
            if not mask.any():
                pieces.append([])
                continue
            segs, orphans = boundary_segments(mesh, mask, dec.dirichlet_values[:, c])
            if orphans.size:
                raise StrategyUnavailableError(
                    "approximate distance functions cannot represent point constraints "
                    "(component %d prescribed at isolated nodes %s)" % (c, orphans.tolist()))
            vals = dec.dirichlet_values[:, c]
            pieces.append([(mesh.nodes[i], mesh.nodes[j], vals[i], vals[j]) for i, j in segs])
        return cls(spec, pieces, mu=mu, fd_step=fd_rel_step * mesh.diameter())

    def phi_g(self, pts):
        """phi (n, 2) and composite g (n, 2) at points (n, 2)."""
        n = len(pts)
        phi = np.ones((n, 2))
        g = np.zeros((n, 2))
        for c, comp in enumerate(self.pieces):
            if not comp:
                continue
            phis = np.array([adf_segment(pts, a, b) for a, b, _, _ in comp])
            phi[:, c] = adf_combine(phis, self.mu)
            w = adf_weights(phis, self.mu)
            gi = np.empty_like(phis)
            for k, (a, b, ga, gb) in enumerate(comp):
                d = b - a
                s = np.clip(((pts - a) @ d) / (d @ d), 0.0, 1.0)
                gi[k] = ga + s * (gb - ga)
            g[:, c] = np.sum(w * gi, axis=0)
        return phi, g

    def _derivatives(self, pts):
        h = self.fd_step
        phi, g = self.phi_g(pts)
        dphi = np.zeros((len(pts), 2, 2))
        dg = np.zeros((len(pts), 2, 2))
        for j in range(2):
            e = np.zeros(2)
            e[j] = h
            pp, gp = self.phi_g(pts + e)
            pm, gm = self.phi_g(pts - e)
            dphi[:, :, j] = (pp - pm) / (2 * h)
            dg[:, :, j] = (gp - gm) / (2 * h)
        return phi, g, dphi, dg

    def prepare(self, points, elements=None, jacobian=True):
        pts = np.asarray(points, dtype=np.float64)
        n = len(pts)
        if not jacobian:
            phi, g = self.phi_g(pts)
            return _Prepared(lambda th: phi * net.forward(self.spec, th, pts) + g, False)
        phi, g, dphi, dg = self._derivatives(pts)

        def with_jac(th):
            N, JN = net.forward_with_jacobian(self.spec, th, pts)
            u = phi * N + g
            cols = [N * dphi[:, :, j] + phi * JN[:, :, j] + dg[:, :, j] for j in range(2)]
            return u, _stack_jacobian_rows(cols, n)

        return _Prepared(with_jac, True)

    def nodal_values(self, theta, nodes):
        return self.prepare(nodes, jacobian=False)(theta)


# ---------------------------------------------------------------------------
# FE-blended field
# ---------------------------------------------------------------------------

class BlendedFEMField:
    """Network in the interior, CST interpolation in the Dirichlet layer.

    Inside an FE triangle the nodal values are g on Dirichlet-constrained
    components and the network output elsewhere, so the field matches g
    exactly at every Dirichlet node for any parameters, and only nodal
    network values (no network derivatives) enter the FE layer.
    """
    name = "pinn-fem"
    uses_fe_layer = True

    def __init__(self, spec, dec):
        self.spec = spec
        self.dec = dec
        mesh = dec.mesh
        self._is_fe = np.zeros(mesh.n_triangles, dtype=bool)
        self._is_fe[dec.fe_elements] = True
        self._mask = dec.dirichlet_mask.astype(np.float64)
        self._g = np.where(dec.dirichlet_mask, dec.dirichlet_values, 0.0)

    def nodal_blend(self, theta, node_ids):
        """Nodal values (k, 2) used by the FE layer for the given nodes."""
        N = net.forward(self.spec, theta, self.dec.mesh.nodes[node_ids])
        mask = self._mask[node_ids]
        return mask * self._g[node_ids] + (1.0 - mask) * N

    def _prepare_fe(self, pts, elements, jacobian):
        mesh = self.dec.mesh
        if not np.all(self._is_fe[elements]):
            raise OutOfElementError("blended evaluation requested outside the FE layer")
        lam = mesh.barycentric(pts, elements)
        if np.any(lam < -1e-9):
            bad = int(np.argmax((lam < -1e-9).any(axis=1)))
            raise OutOfElementError("point %s is not inside triangle %d" % (pts[bad], elements[bad]))
        tris = mesh.triangles[elements]
        nodes, local = np.unique(tris, return_inverse=True)
        local = local.reshape(tris.shape)
        grads = mesh.shape_gradients(elements)   # (n, 3, 2)
        n = len(pts)

        def fn(th):
            uh = self.nodal_blend(th, nodes)
            corner = [uh[local[:, i]] for i in range(3)]
            u = corner[0] * lam[:, 0:1] + corner[1] * lam[:, 1:2] + corner[2] * lam[:, 2:3]
            if not jacobian:
                return u
            cols = [corner[0] * grads[:, 0, j:j + 1] + corner[1] * grads[:, 1, j:j + 1]
                    + corner[2] * grads[:, 2, j:j + 1] for j in range(2)]
            return u, _stack_jacobian_rows(cols, n)

        return fn

    def prepare(self, points, elements=None, jacobian=True):
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        if elements is None:
            elements = self.dec.mesh.locate(pts)
        elements = np.asarray(elements, dtype=np.int64).reshape(-1)
        in_fe = self._is_fe[elements]
        fe_idx = np.flatnonzero(in_fe)
        nn_idx = np.flatnonzero(~in_fe)
        nn_fn = None
        if nn_idx.size:
            nn_pts = pts[nn_idx]
            if jacobian:
                nn_fn = lambda th: net.forward_with_jacobian(self.spec, th, nn_pts)  # noqa: E731
            else:
                nn_fn = lambda th: net.forward(self.spec, th, nn_pts)  # noqa: E731
        fe_fn = self._prepare_fe(pts[fe_idx], elements[fe_idx], jacobian) if fe_idx.size else None
        if fe_fn is None:
            return _Prepared(nn_fn, jacobian)
        if nn_fn is None:
            return _Prepared(fe_fn, jacobian)
        order = np.argsort(np.concatenate([nn_idx, fe_idx]), kind="stable")

        def merged(th):
            a, b = nn_fn(th), fe_fn(th)
            if not jacobian:
                return _take(_cat([a, b]), order)
            return _take(_cat([a[0], b[0]]), order), _take(_cat([a[1], b[1]]), order)

        return _Prepared(merged, jacobian)

    def nodal_values(self, theta, nodes=None):
        ids = np.arange(self.dec.mesh.n_nodes)
        return value_of(self.nodal_blend(theta, ids))


def _cat(items):
    if any(isinstance(x, Var) for x in items):
        return concat(items, axis=0)
    return np.concatenate(items, axis=0)


def _take(x, order):
    return x[order]


def blended_eval(dec, spec, theta, x, element):
    """Blended (u, J) at one point of an FE-layer triangle."""
    field = BlendedFEMField(spec, dec)
    if not field._is_fe[element]:
        raise OutOfElementError("triangle %d is not in the FE layer" % element)
    u, J = field.prepare(np.asarray(x, float).reshape(1, 2), [element])(theta)
    return u[0], J[0]


def make_strategy(name, spec, dec, mu=1.0):
    if name == "soft":
        return SoftField(spec)
    if name == "df":
        return DistanceField.from_decomposition(spec, dec)
    if name == "adf":
        return ApproxDistanceField.from_decomposition(spec, dec, mu=mu)
    if name == "pinn-fem":
        return BlendedFEMField(spec, dec)
    raise ValueError("unknown strategy %r (choose from %s)" % (name, ", ".join(STRATEGIES)))


def field_eval(strategy, theta, x, element=None):
    """(u, J) of ``strategy`` at one point or a batch of points."""
    pts = np.asarray(x, dtype=np.float64)
    single = pts.ndim == 1
    pts = pts.reshape(-1, 2)
    if element is not None:
        element = np.atleast_1d(element)
    u, J = strategy.prepare(pts, element)(theta)
    if single:
        return u[0], J[0]
    return u, J
