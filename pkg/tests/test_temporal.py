import numpy as np
import pytest

from armagf import (
    Arma1,
    GraphTables,
    InputError,
    JointResponse,
    arma1_transfer,
    build_shift_operator,
    eigendecompose,
    evaluate_response,
    measure_temporal_gain,
    parallel_transfer,
    periodic_transfer,
    random_stable_design,
    random_weighted_graph,
    response_surface,
    to_parallel,
    to_periodic,
)


def nonisolated_graph(n, p, seed):
    for k in range(32):
        g = random_weighted_graph(n, p, seed=(seed, k), weight_range=(1.0, 1.0))
        if np.all(g.degree_vector() > 0):
            return g
    raise AssertionError("no graph without isolated nodes")


GRAPH = nonisolated_graph(24, 0.3, seed=1)
SPEC = eigendecompose(build_shift_operator(GRAPH, "normalized"))


def test_arma1_transfer_reduces_to_static_at_z1():
    mu = np.linspace(-0.9, 0.9, 50)
    h = arma1_transfer(0.5, 1.0, 1.0 + 0j, mu)
    assert np.abs(h - 1.0 / (1.0 - 0.5 * mu)).max() < 1e-12


def test_arma1_transfer_memoryless_when_psi_zero():
    z = np.exp(1j * 0.9)
    mu = np.linspace(-1, 1, 7)
    assert np.allclose(arma1_transfer(0.0, 2.0, z, mu), 2.0 / z)


def test_transfer_rejects_interior_z():
    with pytest.raises(InputError):
        arma1_transfer(0.5, 1.0, 0.5 + 0j, np.array([0.1]))
    # explicit override allowed
    arma1_transfer(0.5, 1.0, 0.5 + 0j, np.array([0.1]), allow_interior=True)


def test_parallel_transfer_k1_equals_arma1():
    d = random_stable_design(1, seed=4)
    form = to_parallel(d)
    z = np.exp(1j * 0.6)
    mu = np.linspace(-1, 1, 21)
    a = parallel_transfer(form, z, mu)
    b = arma1_transfer(form.psi[0], form.phi[0], z, mu)
    assert np.abs(a - b).max() < 1e-14


def test_parallel_transfer_z1_equals_response():
    d = random_stable_design(3, seed=6)
    form = to_parallel(d)
    mu = np.linspace(-1, 1, 100)
    h = parallel_transfer(form, 1.0 + 0j, mu)
    assert np.abs(h - evaluate_response(form, mu)).max() < 1e-12


def test_periodic_transfer_z1_equals_response():
    d = random_stable_design(4, seed=8)
    form = to_periodic(d)
    mu = np.linspace(-1, 1, 100)
    h = periodic_transfer(form, 1.0 + 0j, mu)
    assert np.abs(h - evaluate_response(form, mu)).max() < 1e-12


def test_periodic_transfer_k1_equals_arma1():
    d = random_stable_design(1, seed=10)
    form = to_periodic(d)
    z = np.exp(1j * 1.2)
    mu = np.linspace(-1, 1, 21)
    a = periodic_transfer(form, z, mu)
    b = arma1_transfer(form.psi[0], form.phi[0], z, mu)
    assert np.abs(a - b).max() < 1e-14


def test_parallel_transfer_matches_state_space_oracle():
    # C (zI - A)^{-1} B with blockdiag A, projected on an eigenvector
    d = random_stable_design(3, seed=12)
    form = to_parallel(d)
    tab = GraphTables.build(GRAPH, "normalized")
    m_dense = tab.dense_m()
    n, k = GRAPH.n, form.order
    a_mat = np.zeros((n * k, n * k), dtype=complex)
    b_mat = np.zeros((n * k, n), dtype=complex)
    c_mat = np.zeros((n, n * k), dtype=complex)
    for i in range(k):
        a_mat[i * n:(i + 1) * n, i * n:(i + 1) * n] = form.psi[i] * m_dense
        b_mat[i * n:(i + 1) * n] = form.phi[i] * np.eye(n)
        c_mat[:, i * n:(i + 1) * n] = np.eye(n)
    for z in (np.exp(1j * 0.4), np.exp(1j * 2.0)):
        h_mat = c_mat @ np.linalg.solve(z * np.eye(n * k) - a_mat, b_mat)
        for idx in (0, 7, 20):
            v = SPEC.basis[:, idx]
            proj = v @ h_mat @ v
            direct = parallel_transfer(form, z, SPEC.mus[idx])
            assert abs(proj - direct) < 1e-10


def test_measured_gain_dc_equals_static_response():
    form = Arma1(0.5, 1.0, radius=1.0)
    m = measure_temporal_gain(form, GRAPH, 5, 0.0, variant="normalized")
    g_static = evaluate_response(form, np.array([SPEC.mus[5]]))[0]
    assert abs(m.gain - abs(g_static)) < 1e-4


def test_measured_gain_closed_form_quarter_pi():
    form = Arma1(0.5, 1.0, radius=1.0)
    idx = int(np.argmin(np.abs(SPEC.mus - 1.0)))
    m = measure_temporal_gain(form, GRAPH, idx, np.pi / 4, variant="normalized",
                              transient_factor=14.0)
    expected = abs(1.0 / (np.exp(1j * np.pi / 4) - 0.5 * SPEC.mus[idx]))
    assert abs(m.gain - expected) / expected < 0.01


def test_measured_gain_independent_of_initial_condition():
    form = Arma1(0.4, 0.9, radius=1.0)
    kw = dict(variant="normalized", transient_factor=14.0)
    m1 = measure_temporal_gain(form, GRAPH, 3, 0.8, y0="zero", **kw)
    m2 = measure_temporal_gain(form, GRAPH, 3, 0.8, y0="random", seed=5, **kw)
    assert abs(m1.gain - m2.gain) < 1e-6


def test_measured_gain_periodic_per_period_axis():
    d = random_stable_design(3, seed=14)
    form = to_periodic(d)
    omega = np.pi / 5
    idx = 10
    m = measure_temporal_gain(form, GRAPH, idx, omega, variant="normalized",
                              transient_factor=14.0)
    expected = periodic_transfer(form, np.exp(1j * omega), SPEC.mus[idx])
    assert abs(m.gain - abs(expected)) / abs(expected) < 0.01
    dphase = (m.phase - np.angle(expected) + np.pi) % (2 * np.pi) - np.pi
    assert abs(dphase) < np.deg2rad(2.0)


def test_transient_error_when_run_too_short():
    from armagf import ConvergenceError

    form = Arma1(psi=0.95, phi=1.0, radius=1.0)  # slow filter
    with pytest.raises(ConvergenceError):
        measure_temporal_gain(form, GRAPH, 2, 2.8, variant="normalized",
                              transient_factor=0.01, fit_samples=24)


def test_joint_response_dispatch():
    d = random_stable_design(2, seed=16)
    pf, qf = to_parallel(d), to_periodic(d)
    z = np.exp(1j * 0.3)
    assert JointResponse(pf).family == "parallel"
    assert np.allclose(JointResponse(pf)(z, 0.5), parallel_transfer(pf, z, 0.5))
    assert np.allclose(JointResponse(qf)(z, 0.5), periodic_transfer(qf, z, 0.5))


def test_response_surface_shape():
    d = random_stable_design(2, seed=18)
    form = to_parallel(d)
    omegas = np.linspace(0, np.pi, 5)
    mus = np.linspace(-1, 1, 9)
    surf = response_surface(form, omegas, mus)
    assert surf.shape == (5, 9)
    assert np.allclose(surf[0], parallel_transfer(form, 1.0 + 0j, mus))
