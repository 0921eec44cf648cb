import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from voltroute.generators import complete_graph, cycle_graph, path_graph, random_regular_graph, star_graph
from voltroute.graph import (
    fiedler_eigenvalue,
    laplacian_dense,
    normalized_fiedler_eigenvalue,
)
from voltroute.solver import (
    PinvOracle,
    SeriesPlan,
    centered_basis,
    lplus_one_one_norm,
    normalized_series_apply,
    one_one_norm,
    pinv_apply,
    pinv_dense,
    series_apply,
    series_degree_for,
    series_tables,
)

from conftest import connected_graphs, random_connected_graph


def unit_orthogonal(rng, n, size):
    Y = rng.standard_normal((n, size))
    Y -= Y.mean(axis=0)
    return Y / np.linalg.norm(Y, axis=0)


def test_pinv_examples():
    k2 = complete_graph(2)
    np.testing.assert_allclose(pinv_apply(k2, [1, -1]), [0.5, -0.5], atol=1e-15)
    np.testing.assert_allclose(pinv_apply(path_graph(3), [1, 0, -1]), [1, 0, -1], atol=1e-14)
    g = random_regular_graph(10, 3, seed=2)
    np.testing.assert_allclose(pinv_apply(g, np.ones(10)), 0, atol=1e-13)


@settings(max_examples=40, deadline=None)
@given(connected_graphs(max_n=10))
def test_pinv_matches_numpy_oracle(g):
    P = pinv_dense(g)
    np.testing.assert_allclose(P, np.linalg.pinv(laplacian_dense(g)), atol=1e-9)
    np.testing.assert_allclose(P, P.T, atol=1e-10)
    n = g.n
    np.testing.assert_allclose(laplacian_dense(g) @ P, np.eye(n) - 1.0 / n, atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(connected_graphs(max_n=10), st.integers(0, 2**32 - 1))
def test_pinv_projects_off_constants(g, seed):
    y = np.random.default_rng(seed).standard_normal(g.n)
    lhs = laplacian_dense(g) @ PinvOracle.from_graph(g).apply(y)
    assert np.linalg.norm(lhs - (y - y.mean())) <= 1e-9 * np.linalg.norm(y)


def test_series_examples():
    k2 = complete_graph(2)
    y = np.array([1.0, -1.0])
    np.testing.assert_array_equal(series_apply(k2, y, SeriesPlan.for_graph(k2, 0)), [0.5, -0.5])
    g = random_regular_graph(8, 3, seed=0)
    plan = SeriesPlan.for_graph(g, 7)
    np.testing.assert_allclose(series_apply(g, np.ones(8), plan), 8 / plan.tau * np.ones(8), rtol=1e-14)
    p3 = path_graph(3)
    k = series_degree_for(fiedler_eigenvalue(p3), 4.0, 1e-8)
    approx = series_apply(p3, np.array([1.0, 0, -1.0]), SeriesPlan(k, 4.0))
    assert np.linalg.norm(approx - [1, 0, -1]) <= 1e-8


def test_series_plan_rejects_negative_k():
    with pytest.raises(ValueError):
        SeriesPlan(-1, 2.0)


def test_series_degree_examples():
    assert series_degree_for(2, 2, 1e-6) == 0
    assert series_degree_for(1, 4, 1e-6) == 49
    with pytest.raises(ValueError):
        series_degree_for(0, 4, 1e-6)
    with pytest.raises(ValueError):
        series_degree_for(1, 4, -1)


def test_series_degree_guarantee(rng):
    for seed in range(6):
        g = random_connected_graph(np.random.default_rng(seed), 9, 8, weighted=False)
        tau = 2.0 * g.max_degree
        for eps in (1e-4, 1e-8):
            k = series_degree_for(fiedler_eigenvalue(g), tau, eps)
            Y = unit_orthogonal(rng, g.n, 20)
            err = np.linalg.norm(series_apply(g, Y, SeriesPlan(k, tau)) - pinv_dense(g) @ Y, axis=0)
            assert err.max() <= eps


def test_series_residual_nonincreasing(rng):
    g = random_connected_graph(rng, 10, 6)
    y = unit_orthogonal(rng, g.n, 1)[:, 0]
    exact = pinv_dense(g) @ y
    plan = SeriesPlan.for_graph(g, 0)
    res = [np.linalg.norm(series_apply(g, y, SeriesPlan(k, plan.tau)) - exact) for k in range(60)]
    assert all(b <= a + 1e-15 for a, b in zip(res, res[1:]))


def test_series_tables_centered_start():
    k2 = complete_graph(2)
    np.testing.assert_array_equal(series_tables(k2, 0), [[0.25, -0.25], [-0.25, 0.25]])
    g = cycle_graph(6)
    T = series_tables(g, 200)
    np.testing.assert_allclose(T, pinv_dense(g), atol=1e-12)
    np.testing.assert_array_equal(centered_basis(3), np.eye(3) - 1 / 3)


def test_normalized_series_examples():
    k2 = complete_graph(2)
    np.testing.assert_allclose(normalized_series_apply(k2, 0, 200), [0.25, -0.25], atol=1e-14)
    st3 = star_graph(3)
    k = series_degree_for(normalized_fiedler_eigenvalue(st3), 3.0, 1e-7)
    np.testing.assert_allclose(normalized_series_apply(st3, 2, k), pinv_dense(st3)[:, 2], atol=1e-6)


def test_normalized_series_uncentered_differs_by_constant():
    g = random_regular_graph(10, 3, seed=4)
    raw = normalized_series_apply(g, 3, 400, center=False)
    diff = raw - pinv_dense(g)[:, 3]
    np.testing.assert_allclose(diff, diff.mean(), atol=1e-10)


def test_normalized_series_weighted(rng):
    g = random_connected_graph(rng, 8, 6)
    Z = normalized_series_apply(g, None, 3000)
    np.testing.assert_allclose(Z, pinv_dense(g), atol=1e-9)


def test_normalized_series_faster_on_k4_than_p8():
    k = 10
    res_k4 = np.linalg.norm(normalized_series_apply(complete_graph(4), 0, k) - pinv_dense(complete_graph(4))[:, 0])
    p8 = path_graph(8)
    res_p8 = np.linalg.norm(normalized_series_apply(p8, 0, k) - pinv_dense(p8)[:, 0])
    assert res_k4 < res_p8


def test_one_one_norm_examples(rng):
    assert one_one_norm(pinv_dense(complete_graph(2))) == pytest.approx(0.5)
    assert one_one_norm(np.eye(5)) == 1.0
    P = pinv_dense(path_graph(3))
    X = rng.standard_normal((3, 10_000))
    ratios = np.abs(P @ X).sum(axis=0) / np.abs(X).sum(axis=0)
    assert ratios.max() <= lplus_one_one_norm(path_graph(3)) + 1e-12


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_one_one_norm_is_supremum(rows, cols, seed):
    r = np.random.default_rng(seed)
    A = r.standard_normal((rows, cols))
    X = r.standard_normal((cols, 500))
    ratios = np.abs(A @ X).sum(axis=0) / np.abs(X).sum(axis=0)
    norm = one_one_norm(A)
    assert ratios.max() <= norm * (1 + 1e-12)
    j = np.argmax(np.abs(A).sum(axis=0))
    assert np.abs(A[:, j]).sum() == pytest.approx(norm, rel=1e-15)
