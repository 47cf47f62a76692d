"""Triangular meshes, Gmsh MSH 2.2 I/O and the FE-layer / NN-interior split.

A :class:`Mesh` is a plain container of numpy arrays. :func:`decompose`
marks every triangle touching a Dirichlet node as part of the finite-element
boundary layer and hands the remaining triangles to the network, together
with the centroid/area quadrature data the energy functional needs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    pass


class MshParseError(MeshError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = "line %d: %s" % (lineno, message)
        super().__init__(message)
        self.lineno = lineno


class UnsupportedElementError(MeshError):
    pass


class DanglingNodeError(MeshError, IndexError):
    pass


class InvalidResolutionError(MeshError):
    pass


class EmptyBoundaryError(MeshError):
    pass


class MissingTagError(MeshError, KeyError):
    def __str__(self):
        return str(self.args[0])


class OutOfDomainError(MeshError):
    pass


def signed_areas(nodes, triangles):
    p = nodes[triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: np.ndarray               # (n, 2) float
    triangles: np.ndarray           # (m, 3) int, counter-clockwise
    edges: np.ndarray               # (k, 2) int, boundary edges
    edge_tags: tuple                # k strings
    physical_names: dict = field(default_factory=dict)  # str(id) -> name

    def __post_init__(self):
        object.__setattr__(self, "nodes", np.asarray(self.nodes, dtype=np.float64).reshape(-1, 2))
        object.__setattr__(self, "triangles", np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3))
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=np.int64).reshape(-1, 2))
        object.__setattr__(self, "edge_tags", tuple(str(t) for t in self.edge_tags))
        object.__setattr__(self, "physical_names", dict(self.physical_names))
        if len(self.edge_tags) != len(self.edges):
            raise MeshError("%d boundary edges but %d tags" % (len(self.edges), len(self.edge_tags)))
        self.validate()

    def validate(self):
        n = len(self.nodes)
        for name, arr in (("triangle", self.triangles), ("edge", self.edges)):
            if arr.size and (arr.min() < 0 or arr.max() >= n):
                raise DanglingNodeError("%s references a node outside 0..%d" % (name, n - 1))
        if len(self.triangles):
            a = signed_areas(self.nodes, self.triangles)
            if np.any(a <= 0):
                bad = int(np.argmax(a <= 0))
                raise MeshError("triangle %d has non-positive signed area %g" % (bad, a[bad]))
        owners = self._edge_triangles()
        for k, (i, j) in enumerate(self.edges):
            count = len(owners.get((min(i, j), max(i, j)), ()))
            if count != 1:
                raise MeshError("boundary edge %d (%d, %d) belongs to %d triangles" % (k, i, j, count))

    def _edge_triangles(self):
        owners = {}
        for t, tri in enumerate(self.triangles):
            for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                owners.setdefault((min(a, b), max(a, b)), []).append(t)
        return owners

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def tags(self):
        return sorted(set(self.edge_tags))

    def areas(self):
        return signed_areas(self.nodes, self.triangles)

    def centroids(self):
        return self.nodes[self.triangles].mean(axis=1)

    def diameter(self):
        lo, hi = self.nodes.min(axis=0), self.nodes.max(axis=0)
        return float(np.hypot(*(hi - lo)))

    def edge_owner(self, k):
        i, j = self.edges[k]
        return self._edge_triangles()[(min(i, j), max(i, j))][0]

    def tag_nodes(self, tag):
        mask = np.array([t == tag for t in self.edge_tags], dtype=bool)
        if not mask.any():
            raise MissingTagError("mesh has no boundary edges tagged %r (tags: %s)" % (tag, self.tags))
        return np.unique(self.edges[mask])

    def barycentric(self, points, elements):
        """Barycentric coordinates of ``points`` (n, 2) in ``elements`` (n,)."""
        p = self.nodes[self.triangles[elements]]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        r = np.asarray(points, dtype=np.float64) - p[:, 0]
        det = d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]
        l1 = (r[:, 0] * d2[:, 1] - r[:, 1] * d2[:, 0]) / det
        l2 = (d1[:, 0] * r[:, 1] - d1[:, 1] * r[:, 0]) / det
        return np.stack([1.0 - l1 - l2, l1, l2], axis=1)

    def locate(self, points, tol=1e-10):
        """Index of a triangle containing each point; raises if any is outside."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        out = np.empty(len(pts), dtype=np.int64)
        all_tris = np.arange(self.n_triangles)
        for k, x in enumerate(pts):
            lam = self.barycentric(np.broadcast_to(x, (self.n_triangles, 2)), all_tris)
            worst = lam.min(axis=1)
            t = int(np.argmax(worst))
            if worst[t] < -tol:
                raise OutOfDomainError("point %s lies outside the mesh" % (x,))
            out[k] = t
        return out

    def shape_gradients(self, elements=None):
        """Constant CST shape-function gradients, shape (m, 3, 2)."""
        tris = self.triangles if elements is None else self.triangles[elements]
        p = self.nodes[tris]
        x, y = p[..., 0], p[..., 1]
        two_a = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
        b = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
        c = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
        return np.stack([b, c], axis=2) / two_a[:, None, None]


# ---------------------------------------------------------------------------
# structured meshes
# ---------------------------------------------------------------------------

BUILTIN_NAMES = {"1": "bottom", "2": "right", "3": "top", "4": "left", "5": "domain"}


def structured_rectangle(x0, x1, y0, y1, nx, ny):
    """Uniform grid split along the lower-left to upper-right diagonals."""
    if nx < 1 or ny < 1:
        raise InvalidResolutionError("need at least one cell per direction, got %d x %d" % (nx, ny))
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    nodes = np.column_stack([X.ravel(), Y.ravel()])

    def nid(i, j):
        return j * (nx + 1) + i

    tris = []
    for j in range(ny):
        for i in range(nx):
            p00, p10, p01, p11 = nid(i, j), nid(i + 1, j), nid(i, j + 1), nid(i + 1, j + 1)
            tris.append((p00, p10, p11))
            tris.append((p00, p11, p01))
    edges, tags = [], []
    for i in range(nx):
        edges.append((nid(i, 0), nid(i + 1, 0)))
        tags.append("bottom")
    for j in range(ny):
        edges.append((nid(nx, j), nid(nx, j + 1)))
        tags.append("right")
    for i in range(nx, 0, -1):
        edges.append((nid(i, ny), nid(i - 1, ny)))
        tags.append("top")
    for j in range(ny, 0, -1):
        edges.append((nid(0, j), nid(0, j - 1)))
        tags.append("left")
    return Mesh(nodes, np.array(tris), np.array(edges), tags, BUILTIN_NAMES)


def structured_unit_square(h):
    if not h > 0:
        raise InvalidResolutionError("mesh size must be positive, got h=%r" % h)
    n = 1.0 / h
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise InvalidResolutionError("1/h must be a positive integer, got h=%r" % h)
    n = int(round(n))
    return structured_rectangle(0.0, 1.0, 0.0, 1.0, n, n)


# ---------------------------------------------------------------------------
# Gmsh MSH 2.2 ASCII
# ---------------------------------------------------------------------------

def parse_msh(text):
    """Parse MSH 2.2 ASCII text. Lines (type 1) become boundary edges tagged
    by physical group name (or id when unnamed); triangles (type 2) become
    elements. z-coordinates are dropped."""
    lines = text.splitlines()
    pos = 0
    names = {}
    node_ids = {}
    coords = []
    tris, edges, tags = [], [], []
    seen_nodes = False

    def next_line():
        nonlocal pos
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        if pos >= len(lines):
            raise MshParseError("unexpected end of file", pos)
        pos += 1
        return pos, lines[pos - 1].strip()

    def expect_end(section):
        no, line = next_line()
        if line != "$End" + section:
            raise MshParseError("expected $End%s, found %r" % (section, line), no)

    def count(section):
        no, line = next_line()
        try:
            return int(line)
        except ValueError:
            raise MshParseError("bad %s count %r" % (section, line), no) from None

    while True:
        while pos < len(lines) and not lines[pos].strip():
            pos += 1
        if pos >= len(lines):
            break
        no, header = next_line()
        if not header.startswith("$") or header.startswith("$End"):
            raise MshParseError("expected a section header, found %r" % header, no)
        section = header[1:]
        if section == "MeshFormat":
            no, line = next_line()
            parts = line.split()
            if not parts or not parts[0].startswith("2"):
                raise MshParseError("only MSH 2.x ASCII is supported, got %r" % line, no)
            if len(parts) > 1 and parts[1] != "0":
                raise MshParseError("binary MSH files are not supported", no)
            expect_end(section)
        elif section == "PhysicalNames":
            for _ in range(count(section)):
                no, line = next_line()
                parts = line.split(None, 2)
                if len(parts) != 3:
                    raise MshParseError("bad physical name line %r" % line, no)
                names[parts[1]] = parts[2].strip().strip('"')
            expect_end(section)
        elif section == "Nodes":
            seen_nodes = True
            for _ in range(count(section)):
                no, line = next_line()
                parts = line.split()
                if len(parts) < 3:
                    raise MshParseError("bad node line %r" % line, no)
                try:
                    node_ids[int(parts[0])] = len(coords)
                    coords.append((float(parts[1]), float(parts[2])))
                except ValueError:
                    raise MshParseError("bad node line %r" % line, no) from None
            expect_end(section)
        elif section == "Elements":
            for _ in range(count(section)):
                no, line = next_line()
                try:
                    parts = [int(p) for p in line.split()]
                except ValueError:
                    raise MshParseError("bad element line %r" % line, no) from None
                if len(parts) < 3:
                    raise MshParseError("bad element line %r" % line, no)
                etype, ntags = parts[1], parts[2]
                tag_vals = parts[3:3 + ntags]
                conn = parts[3 + ntags:]
                if etype not in (1, 2):
                    raise UnsupportedElementError("line %d: element type %d is not supported (only 1 and 2)"
                                                  % (no, etype))
                want = 2 if etype == 1 else 3
                if len(conn) != want:
                    raise MshParseError("element type %d needs %d nodes, got %d" % (etype, want, len(conn)), no)
                try:
                    idx = [node_ids[c] for c in conn]
                except KeyError as exc:
                    raise DanglingNodeError("line %d: element references unknown node %s" % (no, exc.args[0])) \
                        from None
                if etype == 1:
                    phys = str(tag_vals[0]) if tag_vals else "0"
                    edges.append(idx)
                    tags.append(phys)
                else:
                    tris.append(idx)
            expect_end(section)
        else:
            # skip unknown sections verbatim
            while True:
                no, line = next_line()
                if line == "$End" + section:
                    break
    if not seen_nodes:
        raise MshParseError("no $Nodes section", None)
    nodes = np.array(coords, dtype=np.float64).reshape(-1, 2)
    tris = np.array(tris, dtype=np.int64).reshape(-1, 3)
    if len(tris):
        flip = signed_areas(nodes, tris) < 0
        tris[flip] = tris[flip][:, [0, 2, 1]]
    tags = [names.get(t, t) for t in tags]
    return Mesh(nodes, tris, np.array(edges, dtype=np.int64).reshape(-1, 2), tags, names)


def serialize_msh(mesh):
    names = dict(mesh.physical_names)
    by_name = {v: k for k, v in names.items()}
    next_id = max([int(k) for k in names if k.isdigit()] + [0]) + 1
    for tag in list(dict.fromkeys(mesh.edge_tags)) + ["domain"]:
        if tag not in by_name and not tag.isdigit():
            by_name[tag] = str(next_id)
            names[str(next_id)] = tag
            next_id += 1

    def phys(tag):
        return by_name.get(tag, tag)

    out = ["$MeshFormat", "2.2 0 8", "$EndMeshFormat"]
    out.append("$PhysicalNames")
    out.append(str(len(names)))
    for k in sorted(names, key=int):
        dim = 2 if names[k] == "domain" else 1
        out.append('%d %s "%s"' % (dim, k, names[k]))
    out.append("$EndPhysicalNames")
    out.append("$Nodes")
    out.append(str(mesh.n_nodes))
    for i, (x, y) in enumerate(mesh.nodes):
        out.append("%d %s %s 0" % (i + 1, repr(float(x)), repr(float(y))))
    out.append("$EndNodes")
    out.append("$Elements")
    out.append(str(len(mesh.edges) + mesh.n_triangles))
    k = 1
    for (i, j), tag in zip(mesh.edges, mesh.edge_tags):
        p = phys(tag)
        out.append("%d 1 2 %s %s %d %d" % (k, p, p, i + 1, j + 1))
        k += 1
    dom = by_name["domain"]
    for a, b, c in mesh.triangles:
        out.append("%d 2 2 %s %s %d %d %d" % (k, dom, dom, a + 1, b + 1, c + 1))
        k += 1
    out.append("$EndElements")
    return "\n".join(out) + "\n"


def read_msh(path):
    return parse_msh(Path(path).read_text(encoding="utf-8"))


def write_msh(path, mesh):
    Path(path).write_text(serialize_msh(mesh), encoding="utf-8")


# ---------------------------------------------------------------------------
# boundary data and decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DirichletSpec:
    """Prescribed displacement ``g`` on the nodes picked by ``selector``.

    ``selector`` is a boundary tag, an explicit sequence of node indices, or
    a vectorised predicate ``f(x, y) -> bool array``. ``g`` is a constant
    2-vector or a vectorised ``g(x, y) -> (gx, gy)``. ``components`` masks
    which displacement components are constrained (a roller fixes one).
    """
    selector: object
    g: object = (0.0, 0.0)
    components: tuple = (True, True)


@dataclass(frozen=True)
class NeumannSpec:
    tag: str
    h: object = (0.0, 0.0)          # constant or vectorised h(x, y) -> (hx, hy)


def _eval_vector(fn, xy):
    """Evaluate a constant or vectorised (x, y) -> 2-vector at points (n, 2)."""
    n = len(xy)
    if callable(fn):
        gx, gy = fn(xy[:, 0], xy[:, 1])
        return np.column_stack([np.broadcast_to(np.asarray(gx, dtype=np.float64), (n,)),
                                np.broadcast_to(np.asarray(gy, dtype=np.float64), (n,))])
    return np.tile(np.asarray(fn, dtype=np.float64).reshape(1, 2), (n, 1))


def select_nodes(mesh, selector):
    if isinstance(selector, str):
        return mesh.tag_nodes(selector)
    if callable(selector):
        hit = np.asarray(selector(mesh.nodes[:, 0], mesh.nodes[:, 1]), dtype=bool)
        return np.flatnonzero(np.broadcast_to(hit, (mesh.n_nodes,)))
    idx = np.unique(np.asarray(selector, dtype=np.int64).ravel())
    if idx.size and (idx.min() < 0 or idx.max() >= mesh.n_nodes):
        raise DanglingNodeError("node selector references nodes outside 0..%d" % (mesh.n_nodes - 1))
    return idx


@dataclass(frozen=True)
class NeumannEdges:
    midpoints: np.ndarray   # (k, 2)
    lengths: np.ndarray     # (k,)
    normals: np.ndarray     # (k, 2) outward unit normals
    elements: np.ndarray    # (k,) owning triangle
    tractions: np.ndarray   # (k, 2) h evaluated at the midpoints
    handles: tuple = ()     # the h callables/constants, one per edge

    def __len__(self):
        return len(self.lengths)

    @classmethod
    def empty(cls):
        z = np.zeros((0, 2))
        return cls(z, np.zeros(0), z, np.zeros(0, dtype=np.int64), z, ())


def neumann_data(mesh, traction_specs):
    """Midpoint-rule data for the traction line integral, one row per edge."""
    owners = mesh._edge_triangles()
    mids, lens, normals, elems, tr, handles = [], [], [], [], [], []
    tags = np.array(mesh.edge_tags, dtype=object)
    for spec in traction_specs:
        ks = np.flatnonzero(tags == spec.tag)
        if ks.size == 0:
            raise MissingTagError("mesh has no boundary edges tagged %r (tags: %s)" % (spec.tag, mesh.tags))
        for k in ks:
            i, j = mesh.edges[k]
            pi, pj = mesh.nodes[i], mesh.nodes[j]
            t = pj - pi
            L = float(np.hypot(*t))
            n = np.array([t[1], -t[0]]) / L
            mid = 0.5 * (pi + pj)
            e = owners[(min(i, j), max(i, j))][0]
            if np.dot(n, mesh.nodes[mesh.triangles[e]].mean(axis=0) - mid) > 0:
                n = -n
            mids.append(mid)
            lens.append(L)
            normals.append(n)
            elems.append(e)
            handles.append(spec.h)
        tr.append(_eval_vector(spec.h, np.array(mids[-len(ks):])))
    if not mids:
        return NeumannEdges.empty()
    return NeumannEdges(np.array(mids), np.array(lens), np.array(normals), np.array(elems, dtype=np.int64),
                        np.vstack(tr), tuple(handles))


@dataclass(frozen=True, eq=False)
class DomainDecomposition:
    mesh: Mesh
    fe_elements: np.ndarray         # sorted triangle indices of the FE layer
    nn_elements: np.ndarray         # sorted triangle indices of the NN interior
    dirichlet_mask: np.ndarray      # (n_nodes, 2) bool, constrained components
    dirichlet_values: np.ndarray    # (n_nodes, 2) prescribed g (0 where free)
    interface_nodes: np.ndarray     # non-Dirichlet nodes of FE elements
    neumann: NeumannEdges = field(default_factory=NeumannEdges.empty)

    @property
    def dirichlet_nodes(self):
        return np.flatnonzero(self.dirichlet_mask.any(axis=1))

    def dirichlet_map(self):
        """node -> prescribed 2-vector (free components reported as nan)."""
        vals = np.where(self.dirichlet_mask, self.dirichlet_values, np.nan)
        return {int(i): vals[i] for i in self.dirichlet_nodes}

    @property
    def collocation_points(self):
        return self.mesh.centroids()[self.nn_elements]

    @property
    def collocation_areas(self):
        return self.mesh.areas()[self.nn_elements]

    @property
    def collocation(self):
        return list(zip(self.collocation_points, self.collocation_areas))

    @property
    def fe_centroids(self):
        return self.mesh.centroids()[self.fe_elements]

    @property
    def fe_areas(self):
        return self.mesh.areas()[self.fe_elements]

    @property
    def fe_quadrature(self):
        return list(zip(self.fe_elements, self.fe_centroids, self.fe_areas))

    @property
    def neumann_edges(self):
        n = self.neumann
        return list(zip(n.midpoints, n.lengths, n.normals, n.handles))


def dirichlet_arrays(mesh, dirichlet):
    """Per-node component mask and prescribed values from DirichletSpecs."""
    mask = np.zeros((mesh.n_nodes, 2), dtype=bool)
    values = np.zeros((mesh.n_nodes, 2))
    for spec in dirichlet:
        idx = select_nodes(mesh, spec.selector)
        if idx.size == 0:
            raise EmptyBoundaryError("Dirichlet selector %r matches no nodes" % (spec.selector,))
        comp = np.asarray(spec.components, dtype=bool)
        g = _eval_vector(spec.g, mesh.nodes[idx])
        for c in range(2):
            if comp[c]:
                mask[idx, c] = True
                values[idx, c] = g[:, c]
    return mask, values


def decompose(mesh, dirichlet, neumann=()):
    if mesh.n_triangles == 0:
        raise MeshError("cannot decompose a mesh without triangles")
    mask, values = dirichlet_arrays(mesh, dirichlet)
    is_dir = mask.any(axis=1)
    fe = is_dir[mesh.triangles].any(axis=1)
    fe_elements = np.flatnonzero(fe)
    nn_elements = np.flatnonzero(~fe)
    fe_nodes = np.unique(mesh.triangles[fe_elements])
    interface = fe_nodes[~is_dir[fe_nodes]]
    return DomainDecomposition(mesh, fe_elements, nn_elements, mask, values, interface,
                               neumann_data(mesh, neumann) if neumann else NeumannEdges.empty())
