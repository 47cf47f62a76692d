"""Closed-form reference solutions: end-loaded cantilever and the 1D bar."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elasticity import Material, Stress2D


@dataclass(frozen=True)
class CantileverSpec:
    """Cantilever of length L and depth D, clamped at x = 0, with a
    parabolic shear load of resultant P on the free end x = L.

    y runs from -D/2 to D/2; thickness is one.
    """
    L: float = 1.0
    D: float = 0.5
    P: float = 20.0 * 0.5 ** 3 / 12.0
    material: Material = Material(70.0, 0.3)

    def __post_init__(self):
        if not (self.L > 0 and self.D > 0 and self.P > 0):
            raise ValueError("L, D and P must be positive")

    @property
    def I(self):
        return self.D ** 3 / 12.0


def timoshenko_displacement(spec, x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    E, nu = spec.material.E, spec.material.nu
    L, D, P = spec.L, spec.D, spec.P
    k = P / (6.0 * E * spec.I)
    ux = k * y * ((6.0 * L - 3.0 * x) * x + (2.0 + nu) * (y * y - D * D / 4.0))
    uy = -k * (3.0 * nu * y * y * (L - x) + (4.0 + 5.0 * nu) * D * D * x / 4.0 + (3.0 * L - x) * x * x)
    return ux, uy


def timoshenko_stress(spec, x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    I, P = spec.I, spec.P
    sxx = P * (spec.L - x) * y / I
    sxy = -P / (2.0 * I) * (spec.D ** 2 / 4.0 - y * y)
    return Stress2D(sxx, np.zeros_like(sxx + sxy), sxy)


def bar_1d_solution(f=0.0, h=0.0, g=0.0, g_left=0.0, g_right=0.0, case="one-end"):
    """Solution of u'' + f = 0 on (0, 1) for constant f, as a callable.

    ``one-end``: -u'(0) = h, u(1) = g. ``both-ends``: u(0) = g_left, u(1) = g_right.
    """
    if case == "one-end":
        c0 = g + f / 2.0 + h
        return lambda x: -f * np.asarray(x, dtype=np.float64) ** 2 / 2.0 - h * np.asarray(x) + c0
    if case == "both-ends":
        c1 = g_right - g_left + f / 2.0
        return lambda x: -f * np.asarray(x, dtype=np.float64) ** 2 / 2.0 + c1 * np.asarray(x) + g_left
    raise ValueError("case must be 'one-end' or 'both-ends', got %r" % case)
