"""Regenerate the shipped MSH fixtures under src/pinnfem/fixtures.

    python3 tools/make_fixtures.py

Outputs:
  square_h0p5.msh   3x3-node structured unit square
  plate_hole.msh    unit square minus a disk of radius 0.2 at (0.5, 0.5)
  plate_crack.msh   unit square h=0.1 with a slit from (0.5, 1) down to (0.5, 0.8)

The generation is deterministic; rerunning rewrites identical files.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.spatial import Delaunay

from pinnfem.mesh import Mesh, signed_areas, structured_unit_square, write_msh

OUT = Path(__file__).resolve().parents[1] / "src" / "pinnfem" / "fixtures"
NAMES = {"1": "bottom", "2": "right", "3": "top", "4": "left", "5": "domain", "6": "hole", "7": "crack"}


def _side_tag(p, q, tol=1e-9):
    for tag, axis, value in (("left", 0, 0.0), ("right", 0, 1.0), ("bottom", 1, 0.0), ("top", 1, 1.0)):
        if abs(p[axis] - value) < tol and abs(q[axis] - value) < tol:
            return tag
    return None


def _boundary_edges(nodes, tris):
    """Edges used by one triangle, oriented as they appear in that (CCW) triangle."""
    count = {}
    for t in tris:
        for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            key = (min(a, b), max(a, b))
            count.setdefault(key, []).append((a, b))
    return sorted(v[0] for v in count.values() if len(v) == 1)


def plate_with_hole(h=0.1, radius=0.2, centre=(0.5, 0.5), n_circle=32):
    cx, cy = centre
    n = int(round(1.0 / h))
    g = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(g, g)
    grid = np.column_stack([X.ravel(), Y.ravel()])
    r = np.hypot(grid[:, 0] - cx, grid[:, 1] - cy)
    grid = grid[r > radius + 0.4 * h]
    ang = 2.0 * np.pi * np.arange(n_circle) / n_circle
    circle = np.column_stack([cx + radius * np.cos(ang), cy + radius * np.sin(ang)])
    # an intermediate ring keeps the elements near the hole well shaped
    r2 = radius + 0.5 * h
    m2 = int(round(n_circle * 0.75))
    ang2 = 2.0 * np.pi * (np.arange(m2) + 0.5) / m2
    ring = np.column_stack([cx + r2 * np.cos(ang2), cy + r2 * np.sin(ang2)])
    keep = np.min(np.hypot(*(grid[:, None, :] - ring[None, :, :]).transpose(2, 0, 1)), axis=1) > 0.45 * h
    nodes = np.vstack([circle, ring, grid[keep]])
    nodes[np.abs(nodes) < 1e-15] = 0.0

    tris = Delaunay(nodes, qhull_options="Qbb Qc Qz Q12").simplices
    cent = nodes[tris].mean(axis=1)
    tris = tris[np.hypot(cent[:, 0] - cx, cent[:, 1] - cy) > radius]
    a = signed_areas(nodes, tris)
    tris[a < 0] = tris[a < 0][:, [0, 2, 1]]
    tris = tris[np.abs(signed_areas(nodes, tris)) > 1e-12]

    edges, tags = [], []
    for i, j in _boundary_edges(nodes, tris):
        tag = _side_tag(nodes[i], nodes[j])
        if tag is None:
            ri = np.hypot(*(nodes[i] - centre))
            rj = np.hypot(*(nodes[j] - centre))
            if abs(ri - radius) > 1e-9 or abs(rj - radius) > 1e-9:
                raise RuntimeError("unexpected boundary edge %s-%s" % (nodes[i], nodes[j]))
            tag = "hole"
        edges.append((i, j))
        tags.append(tag)
    return Mesh(nodes, tris, edges, tags, NAMES)


def plate_with_crack(h=0.1, x_crack=0.5, tip=0.8):
    """Structured square with the nodes on the crack line above the tip
    duplicated; elements right of the line use the copies."""
    base = structured_unit_square(h)
    nodes = base.nodes.copy()
    on_crack = np.flatnonzero((np.abs(nodes[:, 0] - x_crack) < 1e-9) & (nodes[:, 1] > tip + 1e-9))
    copy_of = {}
    extra = []
    for k, i in enumerate(on_crack):
        copy_of[int(i)] = len(nodes) + k
        extra.append(nodes[i])
    nodes = np.vstack([nodes, np.array(extra)])

    tris = base.triangles.copy()
    right = base.centroids()[:, 0] > x_crack
    for t in np.flatnonzero(right):
        tris[t] = [copy_of.get(int(v), int(v)) for v in tris[t]]

    edges, tags = [], []
    for i, j in _boundary_edges(nodes, tris):
        tag = _side_tag(nodes[i], nodes[j])
        if tag is None:
            if not (abs(nodes[i][0] - x_crack) < 1e-9 and abs(nodes[j][0] - x_crack) < 1e-9):
                raise RuntimeError("unexpected boundary edge %s-%s" % (nodes[i], nodes[j]))
            tag = "crack"
        edges.append((i, j))
        tags.append(tag)
    return Mesh(nodes, tris, edges, tags, NAMES)


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    meshes = {
        "square_h0p5.msh": structured_unit_square(0.5),
        "plate_hole.msh": plate_with_hole(),
        "plate_crack.msh": plate_with_crack(),
    }
    for name, mesh in meshes.items():
        write_msh(OUT / name, mesh)
        area = mesh.areas().sum()
        print("%-16s %4d nodes %4d triangles %3d edges area %.6f tags %s"
              % (name, mesh.n_nodes, mesh.n_triangles, len(mesh.edges), area, mesh.tags))


if __name__ == "__main__":
    main()
