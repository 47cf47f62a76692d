import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pinnfem.analytic import CantileverSpec, bar_1d_solution, timoshenko_displacement, timoshenko_stress
from pinnfem.elasticity import Strain2D, stress

SPEC = CantileverSpec()
coords = st.tuples(st.floats(0.0, 1.0), st.floats(-0.25, 0.25))


def test_clamped_origin():
    ux, uy = timoshenko_displacement(SPEC, 0.0, 0.0)
    assert ux == 0.0 and uy == 0.0


def test_tip_deflection_value():
    assert timoshenko_displacement(SPEC, 1.0, 0.0)[1] == pytest.approx(-0.11160714, abs=1e-8)


@given(coords)
def test_ux_antisymmetric_uy_symmetric(p):
    x, y = p
    a, b = timoshenko_displacement(SPEC, x, y), timoshenko_displacement(SPEC, x, -y)
    assert a[0] == pytest.approx(-b[0], abs=1e-15)
    assert a[1] == pytest.approx(b[1], abs=1e-15)


def test_traction_free_surfaces_and_end_load():
    x = np.linspace(0, 1, 11)
    for y in (-0.25, 0.25):
        assert np.abs(timoshenko_stress(SPEC, x, y * np.ones_like(x)).sxy).max() < 1e-14
    y = np.linspace(-0.25, 0.25, 11)
    s = timoshenko_stress(SPEC, np.ones_like(y), y)
    assert np.abs(s.sxx).max() < 1e-14
    assert timoshenko_stress(SPEC, 0.3, 0.0).sxy == pytest.approx(-0.625)
    np.testing.assert_allclose(-s.sxy, 10.0 * (0.0625 - y ** 2), atol=1e-14)


def test_stress_matches_displacement_gradient():
    # plane-stress Hooke's law applied to the FD strain reproduces the stress
    h = 1e-6
    for x, y in [(0.2, 0.1), (0.7, -0.2), (0.5, 0.0)]:
        dx = [(a - b) / (2 * h) for a, b in zip(timoshenko_displacement(SPEC, x + h, y),
                                                timoshenko_displacement(SPEC, x - h, y))]
        dy = [(a - b) / (2 * h) for a, b in zip(timoshenko_displacement(SPEC, x, y + h),
                                                timoshenko_displacement(SPEC, x, y - h))]
        s = stress(Strain2D(dx[0], dy[1], dx[1] + dy[0]), SPEC.material)
        exact = timoshenko_stress(SPEC, x, y)
        np.testing.assert_allclose(s, exact, atol=1e-7)


@settings(max_examples=30)
@given(coords)
def test_equilibrium(p):
    x, y = p
    h = 1e-5
    S = lambda x, y: timoshenko_stress(SPEC, x, y)
    fx = (S(x + h, y).sxx - S(x - h, y).sxx + S(x, y + h).sxy - S(x, y - h).sxy) / (2 * h)
    fy = (S(x + h, y).sxy - S(x - h, y).sxy + S(x, y + h).syy - S(x, y - h).syy) / (2 * h)
    assert abs(fx) < 1e-7 and abs(fy) < 1e-7


def test_invalid_geometry():
    with pytest.raises(ValueError):
        CantileverSpec(L=-1.0)


def test_bar_examples():
    assert bar_1d_solution(f=1.0)(0.0) == pytest.approx(0.5)
    assert bar_1d_solution(f=0.0, h=1.0, g=0.0)(0.0) == pytest.approx(1.0)
    u = bar_1d_solution(f=2.0, g_left=1.0, g_right=3.0, case="both-ends")
    assert u(0.0) == pytest.approx(1.0) and u(1.0) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        bar_1d_solution(case="middle")


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5))
def test_bar_residuals(f, h, g, gl):
    x = np.linspace(0, 1, 9)
    d = 1e-3
    u = bar_1d_solution(f=f, h=h, g=g)
    upp = (u(x + d) - 2 * u(x) + u(x - d)) / d ** 2
    assert np.abs(upp + f).max() < 1e-6 * (1 + abs(f) + abs(h) + abs(g))
    assert abs(u(1.0) - g) < 1e-12 * (1 + abs(f) + abs(g) + abs(h))
    assert abs(-(u(d) - u(-d)) / (2 * d) - h) < 1e-9 * (1 + abs(f) + abs(h) + abs(g))
    v = bar_1d_solution(f=f, g_left=gl, g_right=g, case="both-ends")
    assert abs(v(0.0) - gl) < 1e-12 * (1 + abs(gl)) and abs(v(1.0) - g) < 1e-12 * (1 + abs(f) + abs(g) + abs(gl))
