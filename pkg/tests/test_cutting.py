import math

import numpy as np
import pytest

from voltroute.cutting import (
    CutBoundViolation,
    cut_sequence,
    heavy_edge_set,
    level_crossing_flow,
    path_decomposition,
    reformulation_chain,
    removal_experiment,
    robust1_check,
    uniform_demands,
    verify_cut_bounds,
)
from voltroute.generators import complete_graph, cycle_graph, glued_paths, path_graph, random_regular_graph
from voltroute.graph import GraphError, vertex_expansion_exact
from voltroute.routing import electric_flow, eta_expansion_bound, point_demand, route_set
from voltroute.solver import lplus_one_one_norm


def test_k2_sequence():
    cs = cut_sequence(complete_graph(2), 0, 1)
    np.testing.assert_allclose(np.abs(cs.psi), 0.5)
    assert cs.levels[0] == pytest.approx(0.0, abs=1e-15)
    assert cs.counts == [1, 0]
    assert cs.flow_sums()[0] == pytest.approx(1.0)
    assert cs.deltas == [pytest.approx(2.0)]
    assert cs.r == 0 and len(cs.sets) == 2
    report = verify_cut_bounds(complete_graph(2), cs)
    assert report.passed and report.r_bound == 0.0
    chain = [c for c in report.checks if c["check"] == "chain_vs_closed_form"][0]
    assert not chain["ok"] and not chain["asserted"]


def test_p3_sequence():
    cs = cut_sequence(path_graph(3), 0, 2)
    np.testing.assert_allclose(cs.psi, [1, 0, -1], atol=1e-14)
    assert cs.median_at_zero and not cs.negated
    assert cs.sets[0] == (2,)
    assert cs.flow_sums()[0] == pytest.approx(1.0)


def test_negation_when_median_negative():
    # star-like tree: most vertices near the sink side
    g = random_regular_graph(12, 3, seed=3)
    for s, t in [(0, 1), (1, 0), (4, 9)]:
        cs = cut_sequence(g, s, t)
        assert cs.levels[0] >= -1e-12


def test_errors():
    with pytest.raises(GraphError):
        cut_sequence(path_graph(3), 1, 1)


def test_c4_opposite_corners():
    g = cycle_graph(4)
    report = verify_cut_bounds(g, cut_sequence(g, 0, 2))
    assert report.passed, report.failures


def test_random_regular_invariants():
    for seed in range(5):
        g = random_regular_graph(12, 3, seed=seed)
        alpha = vertex_expansion_exact(g)
        for s, t in [(0, 11), (3, 7)]:
            cs = cut_sequence(g, s, t)
            for total in cs.flow_sums()[:-1]:
                assert abs(total - 1.0) <= 1e-9
            assert all(set(b) <= set(a) for a, b in zip(cs.sets, cs.sets[1:]))
            assert cs.sizes[-1] == 0 and cs.counts[-1] == 0
            report = verify_cut_bounds(g, cs, alpha)
            assert report.passed, report.failures


def test_strict_mode_raises():
    g = cycle_graph(4)
    cs = cut_sequence(g, 0, 2)
    with pytest.raises(CutBoundViolation, match="isoperimetry"):
        verify_cut_bounds(g, cs, alpha=1.5, strict=True)


def test_every_level_carries_unit_flow(rng):
    g = random_regular_graph(16, 3, seed=4)
    psi = cut_sequence(g, 2, 13).psi
    lo, hi = psi.min(), psi.max()
    for c in rng.uniform(lo, hi, size=100):
        assert level_crossing_flow(g, psi, c) == pytest.approx(1.0, abs=1e-9)


def test_potential_l1_identity():
    g = random_regular_graph(10, 3, seed=6)
    psi = cut_sequence(g, 0, 5).psi
    l1 = np.abs(psi).sum()
    assert l1 == pytest.approx(2 * psi[psi > 0].sum(), abs=1e-9)
    assert l1 == pytest.approx(-2 * psi[psi < 0].sum(), abs=1e-9)


def test_reformulation_chain():
    for seed in range(3):
        g = random_regular_graph(10, 3, seed=seed)
        norm, col, pair = reformulation_chain(g)
        assert norm == pytest.approx(col)
        assert col <= pair + 1e-12


def test_expansion_bound_random_regular():
    g = random_regular_graph(10, 3, seed=0)
    assert lplus_one_one_norm(g) <= eta_expansion_bound(g).value + 1e-9


def test_heavy_edges():
    f = electric_flow(path_graph(3), point_demand(3, 0, 2))
    assert len(heavy_edge_set(f, 0.5)) == 2
    assert len(heavy_edge_set(f, 1.0 + 1e-9)) == 0
    tri = complete_graph(3)
    f = electric_flow(tri, point_demand(3, 0, 1))
    assert heavy_edge_set(f, 0.5).edges == {0}


def test_heavy_edges_monotone_and_bounded():
    g = random_regular_graph(16, 3, seed=1)
    f = electric_flow(g, point_demand(16, 0, 9))
    grid = np.linspace(0.05, 1.0, 20)
    sets = [heavy_edge_set(f, p) for p in grid]
    assert all(b.edges <= a.edges for a, b in zip(sets, sets[1:]))
    assert all(len(q) * q.p <= np.abs(f).sum() + 1e-12 for q in sets)


def test_robust1():
    g = random_regular_graph(16, 3, seed=2)
    for p in (0.05, 0.3, 1.0):
        assert robust1_check(g, 0, 5, p)["ok"]
    with pytest.raises(ValueError):
        robust1_check(g, 0, 5, 0.0)
    with pytest.raises(ValueError):
        robust1_check(g, 0, 5, 1.5)


def test_path_decomposition_examples():
    p3 = path_graph(3)
    assert path_decomposition(p3, electric_flow(p3, point_demand(3, 0, 2))) == [((0, 1, 2), pytest.approx(1.0))]
    tri = complete_graph(3)
    paths = dict(path_decomposition(tri, electric_flow(tri, point_demand(3, 0, 1))))
    assert paths == {(0, 1): pytest.approx(2 / 3), (0, 2, 1): pytest.approx(1 / 3)}
    c4 = cycle_graph(4)
    paths = path_decomposition(c4, electric_flow(c4, point_demand(4, 0, 2)))
    assert sorted(len(p) for p, _ in paths) == [3, 3]
    assert [v for _, v in paths] == pytest.approx([0.5, 0.5])


def test_path_decomposition_conserves(rng):
    for seed in range(5):
        g = random_regular_graph(14, 3, seed=seed)
        f = electric_flow(g, point_demand(14, 0, 13))
        paths = path_decomposition(g, f)
        assert sum(v for _, v in paths) == pytest.approx(1.0, abs=1e-9)
        assert sum((len(p) - 1) * v for p, v in paths) == pytest.approx(np.abs(f).sum(), abs=1e-9)


def test_uniform_demands():
    D = uniform_demands(4)
    assert D.shape == (4, 6)
    np.testing.assert_array_equal(D.sum(axis=0), 0)


def test_removal_examples():
    g = glued_paths(3)
    loads = np.abs(route_set(g, uniform_demands(g.n))).sum(axis=1)
    res = removal_experiment(g, 0.1, edges=[0])
    assert res["removed_fraction"] == pytest.approx(loads[0] / math.comb(g.n, 2))
    small = removal_experiment(g, 1e-6, edges=[])
    assert small["removed_fraction"] == 0.0
    with pytest.raises(ValueError):
        removal_experiment(g, 0.0)


def test_removal_random_regular_seeds():
    g = random_regular_graph(12, 3, seed=0)
    for seed in range(10):
        res = removal_experiment(g, 0.1, seed)
        assert res["ok"] and len(res["removed_edges"]) == math.ceil(0.1 * g.m)
    a = removal_experiment(g, 0.2, 5)
    assert a == removal_experiment(g, 0.2, 5)
