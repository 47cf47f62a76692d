"""Plane linear elasticity in Voigt notation.

Strains are ordered ``(exx, eyy, gxy)`` with engineering shear
``gxy = 2*exy``, so the strain-energy density is ``0.5 * e^T C e`` with no
extra factors. Units are mm and MPa throughout; energies come out in
mJ/mm^3 (per unit thickness after integration over an area).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

PLANE_STRESS = "plane-stress"
PLANE_STRAIN = "plane-strain"

# maps a flattened 2x2 gradient [g00, g01, g10, g11] to (exx, eyy, gxy)
GRAD_TO_VOIGT = np.array([
    [1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0],
    [0.0, 0.0, 1.0],
    [0.0, 1.0, 0.0],
])


@dataclass(frozen=True)
class Material:
    E: float
    nu: float
    mode: str = PLANE_STRESS

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError("Young's modulus must be positive, got %r" % self.E)
        if not 0.0 <= self.nu < 0.5:
            raise ValueError("Poisson's ratio must lie in [0, 0.5), got %r" % self.nu)
        if self.mode not in (PLANE_STRESS, PLANE_STRAIN):
            raise ValueError("mode must be %r or %r, got %r" % (PLANE_STRESS, PLANE_STRAIN, self.mode))


class Strain2D(NamedTuple):
    exx: float
    eyy: float
    gxy: float


class Stress2D(NamedTuple):
    sxx: float
    syy: float
    sxy: float


def stiffness_matrix(m):
    E, nu = m.E, m.nu
    if m.mode == PLANE_STRESS:
        c = E / (1.0 - nu * nu)
        return c * np.array([[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, 0.5 * (1.0 - nu)]])
    c = E / ((1.0 + nu) * (1.0 - 2.0 * nu))
    return c * np.array([[1.0 - nu, nu, 0.0], [nu, 1.0 - nu, 0.0], [0.0, 0.0, 0.5 * (1.0 - 2.0 * nu)]])


def strain_from_gradient(grad):
    g = np.asarray(grad, dtype=np.float64)
    return Strain2D(g[0, 0], g[1, 1], g[0, 1] + g[1, 0])


def voigt_strains(J):
    """Batched strains (n, 3) from displacement gradients (n, 2, 2).

    Works on ndarrays and on tape Vars (it is a single reshape and matmul).
    """
    n = J.shape[0]
    return J.reshape(n, 4) @ GRAD_TO_VOIGT


def stress(s, m):
    return Stress2D(*(stiffness_matrix(m) @ np.asarray(s, dtype=np.float64)))


def energy_density(s, m):
    e = np.asarray(s, dtype=np.float64)
    return 0.5 * float(e @ stiffness_matrix(m) @ e)


def energy_densities(strains, C):
    """Per-row ``0.5 e^T C e`` for strains of shape (n, 3); Var-compatible."""
    return ((strains @ C) * strains).sum(axis=1) * 0.5
