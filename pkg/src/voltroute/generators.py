"""Graph families used by the experiments."""

from __future__ import annotations

import numpy as np

from .graph import GraphError, WeightedGraph, build_graph

KINDS = ("path", "cycle", "complete", "star", "random-regular", "glued-paths")


def path_graph(n: int) -> WeightedGraph:
    return build_graph(n, [(i, i + 1) for i in range(n - 1)])


def cycle_graph(n: int) -> WeightedGraph:
    if n < 3:
        raise GraphError("a simple cycle needs n >= 3")
    return build_graph(n, [(i, (i + 1) % n) for i in range(n)])


def complete_graph(n: int) -> WeightedGraph:
    return build_graph(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star_graph(leaves: int) -> WeightedGraph:
    """Vertex 0 is the center."""
    return build_graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)])


def glued_paths(k: int) -> WeightedGraph:
    """Hubs 0 and 1 joined by a bridge edge and by ``k`` disjoint paths of ``k`` edges.

    The bridge is edge id 0.  n = 2 + k(k-1), m = k^2 + 1.
    """
    if k < 1:
        raise GraphError("glued-paths needs k >= 1")
    edges = [(0, 1)]
    nxt = 2
    for _ in range(k):
        chain = [0] + list(range(nxt, nxt + k - 1)) + [1]
        nxt += k - 1
        edges.extend(zip(chain[:-1], chain[1:]))
    return build_graph(nxt, edges)


def random_regular_graph(n: int, d: int, seed=None, max_tries: int = 100_000) -> WeightedGraph:
    """Uniform-ish simple connected ``d``-regular graph via the pairing model.

    Stubs are shuffled and paired; the draw is rejected and retried until it
    has no loops, no parallel edges and is connected.
    """
    if d < 1 or d >= n:
        raise GraphError(f"random-regular needs 1 <= d < n, got d={d}, n={n}")
    if (n * d) % 2:
        raise GraphError(f"no {d}-regular graph on {n} vertices: n*d must be even")
    rng = np.random.default_rng(seed)
    stubs = np.repeat(np.arange(n), d)
    for _ in range(max_tries):
        pairs = rng.permutation(stubs).reshape(-1, 2)
        u = pairs.min(axis=1)
        v = pairs.max(axis=1)
        if np.any(u == v):
            continue
        if len(np.unique(u * n + v)) != len(u):
            continue
        order = np.lexsort((v, u))
        g = build_graph(n, zip(u[order].tolist(), v[order].tolist()))
        if g.connected:
            return g
    raise GraphError(f"pairing model failed to produce a simple connected graph in {max_tries} tries")


def generate(kind: str, seed=None, **params) -> WeightedGraph:
    """Dispatch on ``kind`` (one of :data:`KINDS`)."""
    if kind == "path":
        return path_graph(params["n"])
    if kind == "cycle":
        return cycle_graph(params["n"])
    if kind == "complete":
        return complete_graph(params["n"])
    if kind == "star":
        return star_graph(params["n"] - 1)
    if kind == "random-regular":
        return random_regular_graph(params["n"], params["d"], seed=seed)
    if kind == "glued-paths":
        return glued_paths(params["k"])
    raise GraphError(f"unknown graph kind {kind!r}; expected one of {', '.join(KINDS)}")
