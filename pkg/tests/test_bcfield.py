import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pinnfem.bcfield import (ApproxDistanceField, BlendedFEMField, DistanceField, OutOfElementError, SoftField,
                             StrategyUnavailableError, adf_combine, adf_segment, adf_weights, blended_eval,
                             field_eval, make_strategy)
from pinnfem.experiments import load_shipped
from pinnfem.mesh import DirichletSpec, Mesh, decompose, structured_unit_square
from pinnfem.net import MlpSpec, forward, forward_with_jacobian, init_params

SPEC = MlpSpec((2, 8, 8, 2))


def shipped_dec(exp, strategy="pinn-fem"):
    cfg = load_shipped("%s_%s.json" % (exp, strategy))
    mesh = cfg.build_mesh()
    spec = cfg.mlp_spec((mesh.nodes.min(axis=0), mesh.nodes.max(axis=0)))
    return spec, decompose(mesh, cfg.dirichlet_specs(mesh), cfg.neumann_specs())


def random_theta(spec, k):
    return np.random.default_rng(k).normal(scale=1.0, size=spec.n_params)


def test_blended_unit_triangle_identity_gradient():
    mesh = Mesh([[0, 0], [1, 0], [0, 1]], [[0, 1, 2]], [], [])
    dec = decompose(mesh, [DirichletSpec([0, 1, 2], g=lambda x, y: (x, y))])
    for k in range(3):
        u, J = blended_eval(dec, SPEC, random_theta(SPEC, k), [0.2, 0.3], 0)
        np.testing.assert_allclose(J, np.eye(2), atol=1e-15)
        np.testing.assert_allclose(u, [0.2, 0.3], atol=1e-15)


def test_blended_vertices():
    mesh = structured_unit_square(0.5)
    dec = decompose(mesh, [DirichletSpec("left")])
    theta = random_theta(SPEC, 0)
    u, _ = blended_eval(dec, SPEC, theta, mesh.nodes[0], 0)
    assert np.all(u == 0.0)
    # node 1 = (0.5, 0) is an interface node of triangle 0
    u, _ = blended_eval(dec, SPEC, theta, mesh.nodes[1], 0)
    np.testing.assert_allclose(u, forward(SPEC, theta, mesh.nodes[1]), rtol=1e-14, atol=1e-15)


def test_blended_errors():
    mesh = structured_unit_square(0.5)
    dec = decompose(mesh, [DirichletSpec("left")])
    theta = init_params(SPEC, 0)
    with pytest.raises(OutOfElementError):
        blended_eval(dec, SPEC, theta, [0.9, 0.9], 0)
    nn_tri = int(dec.nn_elements[0])
    with pytest.raises(OutOfElementError):
        blended_eval(dec, SPEC, theta, mesh.centroids()[nn_tri], nn_tri)


def test_blended_jacobian_is_constant_per_element_and_network_free():
    mesh = structured_unit_square(0.5)
    dec = decompose(mesh, [DirichletSpec("bottom")])
    field = BlendedFEMField(SPEC, dec)
    theta = random_theta(SPEC, 3)
    t = int(dec.fe_elements[0])
    p = mesh.nodes[mesh.triangles[t]]
    pts = np.array([p.mean(axis=0), 0.6 * p[0] + 0.2 * p[1] + 0.2 * p[2]])
    _, J = field.prepare(pts, [t, t])(theta)
    np.testing.assert_allclose(J[0], J[1], rtol=1e-13, atol=1e-15)
    # hand CST: J = sum_i u_i (x) grad N_i from the nodal blend
    uh = field.nodal_values(theta)[mesh.triangles[t]]
    A = np.column_stack([np.ones(3), p])
    grads = np.linalg.inv(A)[1:].T                 # rows: grad N_i
    np.testing.assert_allclose(J[0], uh.T @ grads, rtol=1e-12, atol=1e-14)


def test_soft_passthrough():
    theta = random_theta(SPEC, 1)
    x = np.random.default_rng(1).uniform(size=(6, 2))
    u, J = field_eval(SoftField(SPEC), theta, x)
    u2, J2 = forward_with_jacobian(SPEC, theta, x)
    assert np.array_equal(u, u2) and np.array_equal(J, J2)


def test_adf_segment_examples():
    a, b = np.array([0.0, 0.0]), np.array([1.0, 0.0])
    assert adf_segment([0.5, 0.0], a, b) == 0.0
    assert adf_segment([0.3, 1e-3], a, b) == pytest.approx(1e-3, rel=0.01)
    assert adf_segment([1.5, 0.0], a, b) > 0
    assert adf_segment([-0.2, 0.0], a, b) > 0
    with pytest.raises(ValueError):
        adf_segment([0, 0], a, a)


@settings(max_examples=60, deadline=None)
@given(st.floats(-2, 3), st.floats(-2, 2))
def test_adf_segment_positive_off_segment_and_normal_slope(x, y):
    a, b = np.array([0.0, 0.0]), np.array([1.0, 0.0])
    phi = adf_segment([x, y], a, b)
    on = abs(y) == 0 and 0 <= x <= 1
    assert phi >= 0
    if not on and (abs(y) > 1e-6 or x < -1e-6 or x > 1 + 1e-6):
        assert phi > 0
    if 0.05 < x < 0.95:
        d = 1e-7
        assert (adf_segment([x, d], a, b) - adf_segment([x, 0.0], a, b)) / d == pytest.approx(1.0, rel=1e-3)


def test_adf_combine_and_weights():
    assert adf_combine([0.0, 5.0]) == 0.0
    np.testing.assert_array_equal(adf_weights([0.0, 5.0]), [1.0, 0.0])
    assert adf_combine([2.0, 2.0]) == pytest.approx(1.0)
    np.testing.assert_allclose(adf_weights([2.0, 2.0]), [0.5, 0.5])
    assert adf_combine([3.0]) == pytest.approx(3.0)
    np.testing.assert_array_equal(adf_weights([3.0]), [1.0])
    np.testing.assert_array_equal(adf_weights([0.0, 0.0, 1.0]), [1.0, 0.0, 0.0])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(1e-6, 1e3), min_size=1, max_size=6))
def test_adf_weights_partition_of_unity_and_product_form(phis):
    w = adf_weights(phis)
    assert w.sum() == pytest.approx(1.0, rel=1e-12)
    # product form: w_i proportional to prod_{j != i} phi_j
    p = np.array([np.prod([phis[j] for j in range(len(phis)) if j != i]) for i in range(len(phis))])
    np.testing.assert_allclose(w, p / p.sum(), rtol=1e-10)
    assert adf_combine(phis) <= min(phis) * (1 + 1e-12)


def test_df_exp1_roller():
    spec, dec = shipped_dec("exp1", "df")
    field = DistanceField.from_decomposition(spec, dec)
    for k in range(10):
        u, _ = field_eval(field, random_theta(spec, k), [0.0, 0.7])
        assert u[0] == 0.0
        u, _ = field_eval(field, random_theta(spec, k), [0.4, 0.0])
        assert u[1] == 0.0


def test_adf_exp5_clamped_edge():
    spec, dec = shipped_dec("exp5", "adf")
    field = ApproxDistanceField.from_decomposition(spec, dec)
    ys = np.random.default_rng(0).uniform(0, 1, 50)
    pts = np.column_stack([np.zeros(50), ys])
    for k in range(50):
        u = field.nodal_values(random_theta(spec, k), pts)
        assert np.max(np.abs(u)) < 1e-9


@pytest.mark.parametrize("exp,strategy", [("exp2", "df"), ("exp3", "df"), ("exp4", "df"), ("exp4", "adf")])
def test_unavailable_strategies(exp, strategy):
    spec, dec = shipped_dec(exp)
    with pytest.raises(StrategyUnavailableError):
        make_strategy(strategy, spec, dec)


def test_unknown_strategy():
    spec, dec = shipped_dec("exp1")
    with pytest.raises(ValueError):
        make_strategy("hard", spec, dec)


@pytest.mark.parametrize("exp,strategy,tol", [
    ("exp1", "df", 0.0), ("exp1", "adf", 1e-9), ("exp2", "adf", 1e-9), ("exp3", "adf", 1e-9),
    ("exp5", "df", 0.0), ("exp5", "adf", 1e-9),
])
def test_baselines_impose_dirichlet(exp, strategy, tol):
    spec, dec = shipped_dec(exp, strategy)
    field = make_strategy(strategy, spec, dec)
    nodes = dec.dirichlet_nodes
    mask = dec.dirichlet_mask[nodes]
    for k in range(10):
        u = np.asarray(field.nodal_values(random_theta(spec, k), dec.mesh.nodes[nodes]))
        assert np.max(np.abs((u - dec.dirichlet_values[nodes])[mask])) <= tol


def test_adf_jacobian_matches_finite_differences():
    spec, dec = shipped_dec("exp3", "adf")
    field = ApproxDistanceField.from_decomposition(spec, dec)
    theta = random_theta(spec, 2)
    x = np.array([[0.3, 0.4], [0.7, 0.2], [0.15, 0.85]])
    _, J = field.prepare(x)(theta)
    h = 1e-6
    for j in range(2):
        e = np.zeros(2)
        e[j] = h
        fd = (field.nodal_values(theta, x + e) - field.nodal_values(theta, x - e)) / (2 * h)
        np.testing.assert_allclose(J[:, :, j], fd, rtol=1e-4, atol=1e-6)


def test_interface_node_values_match_network():
    spec, dec = shipped_dec("exp1")
    field = BlendedFEMField(spec, dec)
    theta = random_theta(spec, 0)
    iface = dec.interface_nodes
    np.testing.assert_allclose(field.nodal_values(theta)[iface], forward(spec, theta, dec.mesh.nodes[iface]),
                               rtol=1e-14, atol=1e-15)
    # approaching an interface node from an FE element and from an NN element
    mesh = dec.mesh
    v = int(iface[5])
    owners = np.flatnonzero((mesh.triangles == v).any(axis=1))
    fe = [t for t in owners if t in set(dec.fe_elements.tolist())][0]
    nn = [t for t in owners if t in set(dec.nn_elements.tolist())][0]
    u_fe, _ = field_eval(field, theta, mesh.nodes[v], fe)
    u_nn, _ = field_eval(field, theta, mesh.nodes[v], nn)
    np.testing.assert_allclose(u_fe, u_nn, rtol=1e-12, atol=1e-14)
