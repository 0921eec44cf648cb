import math

import numpy as np
import pytest

from voltroute.generators import complete_graph, cycle_graph, path_graph, random_regular_graph
from voltroute.routing import electric_flow, exact_table, point_demand
from voltroute.walk import (
    WalkError,
    edge_marginals,
    enumerate_paths,
    expected_latency,
    path_probability,
    perturbed_table,
    sample_lengths,
    sample_walk,
    short_edge_diagnostics,
    total_variation,
    transition,
    unit_walk,
    walk_model,
)

from conftest import random_connected_graph


def unit_model(g, s, t):
    return walk_model(g, electric_flow(g, point_demand(g.n, s, t)), require_acyclic=True)


def test_path_model():
    m = unit_model(path_graph(3), 0, 2)
    np.testing.assert_allclose(m.start, [1, 0, 0])
    succ, stop = transition(m, 1)
    assert succ == {2: pytest.approx(1.0)} and stop == 0.0
    assert m.exit[2] == pytest.approx(1.0)
    assert path_probability(m, [0, 1, 2]) == pytest.approx(1.0)
    assert len(enumerate_paths(m)) == 1
    assert expected_latency(m) == pytest.approx(2.0)


def test_triangle_model():
    tri = complete_graph(3)
    m = unit_model(tri, 0, 1)
    succ, _ = transition(m, 0)
    assert succ[1] == pytest.approx(2 / 3) and succ[2] == pytest.approx(1 / 3)
    assert transition(m, 2)[0] == {1: pytest.approx(1.0)}
    assert path_probability(m, [0, 1]) == pytest.approx(2 / 3, abs=1e-15)
    assert path_probability(m, [0, 2, 1]) == pytest.approx(1 / 3, abs=1e-15)
    assert path_probability(m, [0, 1, 2]) == 0.0
    probs = sorted(p.probability for p in enumerate_paths(m))
    assert probs == pytest.approx([1 / 3, 2 / 3], abs=1e-15)
    assert expected_latency(m) == pytest.approx(4 / 3)


def test_negated_flow_starts_at_sink():
    g = path_graph(4)
    f = electric_flow(g, point_demand(4, 0, 3))
    assert walk_model(g, -f).start[3] == pytest.approx(1.0)


def test_cycle_opposite_corners():
    paths = enumerate_paths(unit_model(cycle_graph(4), 0, 2))
    assert len(paths) == 2
    assert [p.probability for p in paths] == pytest.approx([0.5, 0.5])


def test_zero_flow_rejected():
    with pytest.raises(WalkError):
        walk_model(path_graph(3), [0.0, 0.0])


def test_circulation_rejected():
    with pytest.raises(WalkError):
        walk_model(cycle_graph(3), [1.0, 1.0, -1.0])


def test_transition_conservation(rng):
    g = random_connected_graph(rng, 10, 10)
    m = unit_model(g, 0, 9)
    for u in range(g.n):
        if m.denominator(u) == 0:
            with pytest.raises(WalkError):
                transition(m, u)
            continue
        succ, stop = transition(m, u)
        assert sum(succ.values()) + stop == pytest.approx(1.0, abs=1e-12)


def test_enumeration_and_marginals(rng):
    for _ in range(10):
        g = random_connected_graph(rng, int(rng.integers(3, 13)), 8)
        s, t = rng.choice(g.n, 2, replace=False)
        m = unit_model(g, int(s), int(t))
        paths = enumerate_paths(m)
        assert sum(p.probability for p in paths) == pytest.approx(1.0, abs=1e-9)
        assert all(p.vertices[-1] == t for p in paths)
        np.testing.assert_allclose(edge_marginals(m, paths), np.abs(m.flow), atol=1e-9)
        assert expected_latency(m) == pytest.approx(np.abs(m.flow).sum(), abs=1e-12)


def test_enumeration_cap():
    with pytest.raises(WalkError, match="capped"):
        enumerate_paths(unit_model(path_graph(13), 0, 12))


def test_sample_walk_follows_flow():
    m = unit_model(complete_graph(3), 0, 1)
    rng = np.random.default_rng(11)
    walks = [sample_walk(m, rng) for _ in range(3000)]
    direct = sum(w.vertices == (0, 1) for w in walks) / len(walks)
    assert abs(direct - 2 / 3) < 4 * math.sqrt(2 / 9 / len(walks))
    assert all(w.probability in (pytest.approx(2 / 3), pytest.approx(1 / 3)) for w in walks[:20])


def test_monte_carlo_length():
    g = random_regular_graph(30, 3, seed=8)
    m = unit_model(g, 0, 17)
    lengths, ends = sample_lengths(m, np.random.default_rng(123), 100_000)
    assert np.all(ends == 17)
    sigma = lengths.std(ddof=1) / math.sqrt(lengths.size)
    assert abs(lengths.mean() - expected_latency(m)) <= 3 * sigma


def test_sampling_is_reproducible():
    m = unit_model(random_regular_graph(12, 3, seed=2), 0, 5)
    a, _ = sample_lengths(m, np.random.default_rng(9), 500)
    b, _ = sample_lengths(m, np.random.default_rng(9), 500)
    np.testing.assert_array_equal(a, b)


def test_total_variation():
    g = complete_graph(3)
    m = unit_model(g, 0, 1)
    assert total_variation(m, m) == 0.0
    table = exact_table(g)
    noisy = perturbed_table(table, g.n**-5.0, np.random.default_rng(0))
    np.testing.assert_allclose(np.linalg.norm(noisy.phi - table.phi, axis=0), g.n**-5.0)
    approx = unit_walk(g, noisy, 0, 1)
    assert total_variation(m, approx) <= g.n**-0.5
    # same directed edges; the perturbed flow leaks a little mass at interior vertices
    arcs = lambda model: {(u, a.head) for u, lst in enumerate(model.arcs) for a in lst}
    assert arcs(approx) == arcs(m)


def test_short_edge_diagnostics():
    m = unit_model(complete_graph(3), 0, 1)
    diag = short_edge_diagnostics(m, 0.5)
    assert diag["short_edges"] == 2
    assert diag["dominant_mass"] == pytest.approx(2 / 3)
