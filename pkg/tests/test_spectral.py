import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from armagf import (
    InputError,
    SpectralIntervalWarning,
    apply_filter_exact,
    build_shift_operator,
    complete_graph,
    eigendecompose,
    gft_forward,
    gft_inverse,
    measure_response,
    path_graph,
    random_weighted_graph,
)

PATH2 = path_graph(2)


def two_node_spectrum():
    op = build_shift_operator(PATH2, "discrete", (0.0, 2.0))
    return eigendecompose(op)


def test_discrete_laplacian_path2():
    op = build_shift_operator(PATH2, "discrete", (0.0, 2.0))
    assert np.array_equal(op.L, [[1.0, -1.0], [-1.0, 1.0]])
    assert np.array_equal(op.M, [[0.0, 1.0], [1.0, 0.0]])


def test_triangle_normalized_eigenvalues():
    op = build_shift_operator(complete_graph(3), "normalized")
    spec = eigendecompose(op)
    assert np.allclose(spec.lambdas, [0.0, 1.5, 1.5], atol=1e-12)


def test_default_intervals():
    assert build_shift_operator(PATH2, "normalized").interval == (0.0, 2.0)
    g = path_graph(3)
    assert build_shift_operator(g, "discrete").interval == (0.0, 4.0)


def test_custom_requires_interval_and_matrix():
    with pytest.raises(InputError):
        build_shift_operator(PATH2, "custom", (0.0, 2.0))
    mat = np.array([[1.0, -1.0], [-1.0, 1.0]])
    op = build_shift_operator(PATH2, "custom", (0.0, 2.0), custom_matrix=mat)
    assert np.array_equal(op.L, mat)


def test_custom_rejects_asymmetric():
    mat = np.array([[1.0, -1.0], [0.5, 1.0]])
    with pytest.raises(InputError):
        build_shift_operator(PATH2, "custom", (0.0, 2.0), custom_matrix=mat)


def test_custom_rejects_nonlocal():
    g = path_graph(3)
    mat = np.eye(3)
    mat[0, 2] = mat[2, 0] = 0.5  # (0,2) is not an edge of the path
    with pytest.raises(InputError):
        build_shift_operator(g, "custom", (0.0, 2.0), custom_matrix=mat)


def test_normalized_rejects_isolated():
    g = path_graph(2)
    lonely = type(g)(3, g.edges)  # node 2 isolated
    with pytest.raises(InputError):
        build_shift_operator(lonely, "normalized")


def test_eigendecompose_two_node_oracle():
    spec = two_node_spectrum()
    assert np.allclose(spec.lambdas, [0.0, 2.0])
    s = 1 / np.sqrt(2)
    assert np.allclose(spec.basis[:, 0], [s, s])
    assert np.allclose(spec.basis[:, 1], [s, -s])


def test_empty_graph_spectrum():
    from armagf import Graph

    g = Graph(4, ())
    op = build_shift_operator(g, "discrete", (0.0, 2.0))
    spec = eigendecompose(op)
    assert np.allclose(spec.lambdas, 0.0)
    assert np.allclose(spec.basis, np.eye(4))


def test_interval_warning_when_spectrum_escapes():
    op = build_shift_operator(path_graph(3), "discrete", (0.0, 1.0))
    with pytest.warns(SpectralIntervalWarning):
        eigendecompose(op)


def test_dense_cap():
    op = build_shift_operator(path_graph(10), "discrete")
    with pytest.raises(InputError):
        eigendecompose(op, dense_cap=5)


def test_translation_identity_random_graphs():
    for seed in range(5):
        g = random_weighted_graph(15, 0.4, seed=seed)
        op = build_shift_operator(g, "discrete")
        spec = eigendecompose(op)
        mu_direct = np.sort(np.linalg.eigvalsh(op.M))[::-1]
        assert np.allclose(spec.mus, mu_direct, atol=1e-8 * max(1, abs(spec.lambdas).max()))
        assert np.allclose(spec.mus, op.radius - spec.lambdas)


def test_one_locality():
    g = random_weighted_graph(12, 0.3, seed=9)
    op = build_shift_operator(g, "normalized")
    nb = g.neighbor_sets()
    for i in range(g.n):
        for j in range(g.n):
            if i != j and j not in nb[i]:
                assert op.L[i, j] == 0.0


def test_basis_orthonormal():
    g = random_weighted_graph(20, 0.3, seed=4)
    spec = eigendecompose(build_shift_operator(g, "discrete"))
    assert np.abs(spec.basis.T @ spec.basis - np.eye(g.n)).max() < 1e-10


def test_eigenpairs_satisfy_definition():
    g = random_weighted_graph(16, 0.4, seed=5)
    op = build_shift_operator(g, "discrete")
    spec = eigendecompose(op)
    scale = np.linalg.norm(op.L)
    for k in (0, 5, 15):
        v = spec.basis[:, k]
        assert np.linalg.norm(op.L @ v - spec.lambdas[k] * v) < 1e-8 * scale
        assert np.linalg.norm(op.M @ v - spec.mus[k] * v) < 1e-8 * scale


def test_gft_forward_examples():
    spec = two_node_spectrum()
    assert np.allclose(gft_forward([1.0, 0.0], spec), [1 / np.sqrt(2), 1 / np.sqrt(2)])
    assert np.allclose(gft_forward(spec.basis[:, 0], spec), [1.0, 0.0], atol=1e-14)
    assert np.array_equal(gft_forward(np.zeros(2), spec), np.zeros(2))


def test_gft_inverse_examples():
    spec = two_node_spectrum()
    s = 1 / np.sqrt(2)
    assert np.allclose(gft_inverse([s, s], spec), [1.0, 0.0])
    assert np.allclose(gft_inverse([0.0, 1.0], spec), spec.basis[:, 1])


def test_gft_dimension_mismatch():
    spec = two_node_spectrum()
    with pytest.raises(InputError):
        gft_forward([1.0, 2.0, 3.0], spec)
    with pytest.raises(InputError):
        gft_inverse([1.0], spec)


@settings(max_examples=50, deadline=None)
@given(
    st.integers(min_value=2, max_value=15),
    st.integers(min_value=0, max_value=2**16),
    st.integers(min_value=0, max_value=2**16),
)
def test_gft_round_trip(n, graph_seed, signal_seed):
    g = random_weighted_graph(n, 0.5, seed=graph_seed)
    hi = 2.0 * max(1.0, g.degree_vector().max())
    spec = eigendecompose(build_shift_operator(g, "discrete", (0.0, hi)))
    x = np.random.default_rng(signal_seed).standard_normal(n)
    back = gft_inverse(gft_forward(x, spec), spec)
    assert np.linalg.norm(back - x) <= 1e-10 * max(np.linalg.norm(x), 1e-300)


def test_apply_filter_identity_and_zero():
    g = random_weighted_graph(10, 0.5, seed=2)
    spec = eigendecompose(build_shift_operator(g, "discrete"))
    x = np.random.default_rng(0).standard_normal(10)
    assert np.allclose(apply_filter_exact(x, spec, lambda mu: np.ones_like(mu)), x)
    assert np.allclose(apply_filter_exact(x, spec, lambda mu: np.zeros_like(mu)), 0.0)


def test_apply_filter_two_node_example():
    spec = two_node_spectrum()
    out = apply_filter_exact([1.0, 0.0], spec, lambda mu: -2.0 / (mu - 2.0))
    assert np.allclose(out, [4.0 / 3.0, 2.0 / 3.0])


def test_apply_filter_matches_dense_resolvent():
    # response r/(mu - p) must equal the dense solve r (M - pI)^{-1} x
    g = random_weighted_graph(14, 0.4, seed=8)
    op = build_shift_operator(g, "normalized")
    spec = eigendecompose(op)
    x = np.random.default_rng(1).standard_normal(14)
    r, p = -1.7, 2.3
    out = apply_filter_exact(x, spec, lambda mu: r / (mu - p))
    dense = r * np.linalg.solve(op.M - p * np.eye(14), x)
    assert np.linalg.norm(out - dense) <= 1e-9 * np.linalg.norm(dense)


def test_apply_filter_rejects_nonfinite():
    spec = two_node_spectrum()
    with pytest.raises(InputError), np.errstate(divide="ignore"):
        apply_filter_exact([1.0, 0.0], spec, lambda mu: 1.0 / (mu - 1.0))


def test_measure_response_scalar_filter():
    g = random_weighted_graph(9, 0.5, seed=3)
    spec = eigendecompose(build_shift_operator(g, "discrete"))
    x = np.random.default_rng(2).standard_normal(9)
    gains = measure_response(3.0 * x, x, spec)
    assert gains.defined.all()
    assert np.allclose(gains.gains, 3.0)


def test_measure_response_recovers_applied_gain():
    g = random_weighted_graph(11, 0.5, seed=6)
    spec = eigendecompose(build_shift_operator(g, "discrete"))
    x = spec.basis @ np.ones(11)  # every coefficient exactly 1
    resp = lambda mu: 1.0 + 0.25 * mu**2
    out = apply_filter_exact(x, spec, resp)
    gains = measure_response(out, x, spec)
    assert gains.defined.all()
    assert np.allclose(gains.gains, resp(spec.mus), atol=1e-10)


def test_measure_response_flags_undefined():
    spec = two_node_spectrum()
    phi1 = spec.basis[:, 0]
    gains = measure_response(2.0 * phi1, phi1, spec)
    assert gains.defined[0] and not gains.defined[1]
    assert np.isclose(gains.gains[0], 2.0)
    assert np.isnan(gains.gains[1])
