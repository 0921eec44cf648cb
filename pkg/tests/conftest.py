import sys

import numpy as np
import pytest
from hypothesis import strategies as st

from voltroute.graph import build_graph


def random_connected_graph(rng, n, extra, weighted=True):
    """Random spanning tree plus ``extra`` random edges (parallel edges allowed)."""
    order = rng.permutation(n)
    edges = []
    for i in range(1, n):
        u, v = int(order[i]), int(order[rng.integers(i)])
        edges.append((u, v))
    for _ in range(extra):
        u, v = rng.choice(n, size=2, replace=False)
        edges.append((int(u), int(v)))
    if weighted:
        return build_graph(n, [(u, v, float(rng.uniform(0.2, 3.0))) for u, v in edges])
    return build_graph(n, edges)


@st.composite
def connected_graphs(draw, max_n=9, weighted=True):
    n = draw(st.integers(2, max_n))
    extra = draw(st.integers(0, 2 * n))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_connected_graph(np.random.default_rng(seed), n, extra, weighted)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
