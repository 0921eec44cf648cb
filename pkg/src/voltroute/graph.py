"""Weighted undirected graphs and their discrete calculus.

Edges are stored with a canonical orientation ``tail < head``; the signed
incidence operator ``B`` maps a vertex function ``x`` to the edge function
``x[tail] - x[head]``.  The Laplacian is ``L = B* W B``.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy import sparse

EXPANSION_CAP = 24


class GraphError(ValueError):
    """Invalid graph input or a graph that does not meet an operation's precondition."""


class Incidence(NamedTuple):
    neighbor: int
    edge: int
    sign: int  # +1 if the vertex is the tail of the edge, -1 if the head


class WeightedGraph:
    """Immutable undirected multigraph with positive edge weights.

    Construct with :func:`build_graph`.  ``tails``, ``heads`` and ``weights``
    are read-only arrays indexed by canonical edge id.
    """

    def __init__(self, n: int, tails: np.ndarray, heads: np.ndarray, weights: np.ndarray):
        self.n = int(n)
        self.tails = tails
        self.heads = heads
        self.weights = weights
        for arr in (tails, heads, weights):
            arr.setflags(write=False)
        adjacency: list[list[Incidence]] = [[] for _ in range(self.n)]
        for e, (u, v) in enumerate(zip(tails.tolist(), heads.tolist())):
            adjacency[u].append(Incidence(v, e, 1))
            adjacency[v].append(Incidence(u, e, -1))
        for lst in adjacency:
            lst.sort(key=lambda inc: (inc.neighbor, inc.edge))
        self._adjacency = tuple(tuple(lst) for lst in adjacency)
        self.connected = _is_connected(self.n, self._adjacency)

    @property
    def m(self) -> int:
        return len(self.weights)

    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.tails.tolist(), self.heads.tolist(), self.weights.tolist()))

    def adjacency(self, u: int) -> tuple[Incidence, ...]:
        """Incident edges of ``u`` ordered by (neighbor id, edge id)."""
        return self._adjacency[u]

    def neighbors(self, u: int) -> list[int]:
        return sorted({inc.neighbor for inc in self._adjacency[u]})

    def degrees(self) -> np.ndarray:
        """Number of incident edges per vertex (parallel edges counted)."""
        return np.array([len(a) for a in self._adjacency], dtype=np.int64)

    def weighted_degrees(self) -> np.ndarray:
        deg = np.zeros(self.n)
        np.add.at(deg, self.tails, self.weights)
        np.add.at(deg, self.heads, self.weights)
        return deg

    @property
    def max_degree(self) -> int:
        return int(self.degrees().max()) if self.n else 0

    @property
    def is_unweighted(self) -> bool:
        return bool(np.all(self.weights == 1.0))

    def require_connected(self) -> None:
        if not self.connected:
            raise GraphError("operation requires a connected graph")

    def incidence(self) -> sparse.csr_matrix:
        """Sparse signed incidence matrix ``B`` of shape (m, n)."""
        rows = np.repeat(np.arange(self.m), 2)
        cols = np.column_stack([self.tails, self.heads]).ravel()
        vals = np.tile([1.0, -1.0], self.m)
        return sparse.csr_matrix((vals, (rows, cols)), shape=(self.m, self.n))

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m})"


def _is_connected(n: int, adjacency: Sequence[Sequence[Incidence]]) -> bool:
    if n == 0:
        return False
    seen = np.zeros(n, dtype=bool)
    seen[0] = True
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for inc in adjacency[u]:
            if not seen[inc.neighbor]:
                seen[inc.neighbor] = True
                queue.append(inc.neighbor)
    return bool(seen.all())


def build_graph(n: int, edges: Iterable[Sequence]) -> WeightedGraph:
    """Build a graph from ``(u, v[, weight])`` tuples; weight defaults to 1.

    Each edge is reoriented so that ``tail < head``.
    """
    if n < 1:
        raise GraphError(f"vertex count must be positive, got {n}")
    tails, heads, weights = [], [], []
    for i, edge in enumerate(edges):
        if len(edge) == 2:
            u, v = edge
            w = 1.0
        elif len(edge) == 3:
            u, v, w = edge
        else:
            raise GraphError(f"edge {i}: expected (u, v) or (u, v, weight), got {edge!r}")
        if int(u) != u or int(v) != v:
            raise GraphError(f"edge {i} ({u}, {v}): vertex ids must be integers")
        u, v, w = int(u), int(v), float(w)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge {i} ({u}, {v}): vertex id out of range [0, {n})")
        if u == v:
            raise GraphError(f"edge {i} ({u}, {v}): self-loop")
        if not (w > 0 and np.isfinite(w)):
            raise GraphError(f"edge {i} ({u}, {v}): weight must be positive and finite, got {w}")
        if u > v:
            u, v = v, u
        tails.append(u)
        heads.append(v)
        weights.append(w)
    return WeightedGraph(
        n,
        np.array(tails, dtype=np.int64),
        np.array(heads, dtype=np.int64),
        np.array(weights, dtype=float),
    )


def _check_len(x: np.ndarray, size: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[0] != size:
        raise GraphError(f"{what} has length {x.shape[0]}, expected {size}")
    return x


def gradient_apply(g: WeightedGraph, x) -> np.ndarray:
    """``B x``: per-edge difference ``x[tail] - x[head]``."""
    x = _check_len(x, g.n, "vertex vector")
    return x[g.tails] - x[g.heads]


def divergence_apply(g: WeightedGraph, f) -> np.ndarray:
    """``B* f``: net outflow at every vertex."""
    f = _check_len(f, g.m, "edge vector")
    out = np.zeros((g.n,) + f.shape[1:])
    np.add.at(out, g.tails, f)
    np.subtract.at(out, g.heads, f)
    return out


def laplacian_apply(g: WeightedGraph, x) -> np.ndarray:
    x = _check_len(x, g.n, "vertex vector")
    grad = gradient_apply(g, x)
    w = g.weights if grad.ndim == 1 else g.weights[:, None]
    return divergence_apply(g, w * grad)


def laplacian_dense(g: WeightedGraph) -> np.ndarray:
    L = np.zeros((g.n, g.n))
    np.add.at(L, (g.tails, g.heads), -g.weights)
    np.add.at(L, (g.heads, g.tails), -g.weights)
    L[np.diag_indices(g.n)] = g.weighted_degrees()
    return L


def laplacian_spectrum(g: WeightedGraph) -> np.ndarray:
    return np.linalg.eigvalsh(laplacian_dense(g))


def fiedler_eigenvalue(g: WeightedGraph) -> float:
    """Smallest nonzero Laplacian eigenvalue (dense eigendecomposition)."""
    g.require_connected()
    if g.n < 2:
        raise GraphError("Fiedler eigenvalue needs at least two vertices")
    return float(laplacian_spectrum(g)[1])


def lambda_max(g: WeightedGraph) -> float:
    return float(laplacian_spectrum(g)[-1])


def normalized_laplacian_dense(g: WeightedGraph) -> np.ndarray:
    inv_sqrt = 1.0 / np.sqrt(g.weighted_degrees())
    return inv_sqrt[:, None] * laplacian_dense(g) * inv_sqrt[None, :]


def normalized_fiedler_eigenvalue(g: WeightedGraph) -> float:
    """Smallest nonzero eigenvalue of ``D^{-1/2} L D^{-1/2}``."""
    g.require_connected()
    return float(np.linalg.eigvalsh(normalized_laplacian_dense(g))[1])


def hop_distances(g: WeightedGraph, source: int) -> np.ndarray:
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[source] = 0
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for inc in g.adjacency(u):
            if dist[inc.neighbor] < 0:
                dist[inc.neighbor] = dist[u] + 1
                queue.append(inc.neighbor)
    return dist


def diameter(g: WeightedGraph) -> int:
    """Hop diameter of the unweighted skeleton, by BFS from every vertex."""
    g.require_connected()
    return int(max(hop_distances(g, s).max() for s in range(g.n)))


def max_degree(g: WeightedGraph) -> int:
    return g.max_degree


class SpectralSummary(NamedTuple):
    fiedler: float
    lambda_max: float
    alpha: float | None
    diameter: int


def spectral_summary(g: WeightedGraph, with_alpha: bool = True) -> SpectralSummary:
    g.require_connected()
    spectrum = laplacian_spectrum(g)
    alpha = None
    if with_alpha and g.is_unweighted and g.n <= EXPANSION_CAP and g.n >= 2:
        alpha = vertex_expansion_exact(g)
    return SpectralSummary(float(spectrum[1]), float(spectrum[-1]), alpha, diameter(g))


def vertex_expansion_exact(g: WeightedGraph, cap: int = EXPANSION_CAP, chunk: int = 1 << 20) -> float:
    """Exact vertex expansion ``min_S |E(S, S^c)| / min(|S|, |S^c|)``.

    Scans every nonempty proper subset as a bitmask.  Only subsets that
    exclude the last vertex are visited since ``S`` and its complement give
    the same ratio.
    """
    if not g.is_unweighted:
        raise GraphError("vertex expansion is defined for unweighted graphs only")
    if g.n > cap:
        raise GraphError(
            f"exact vertex expansion enumerates 2^n subsets; n={g.n} exceeds cap {cap}. "
            "Skip expansion-dependent checks for this graph."
        )
    if g.n < 2:
        raise GraphError("vertex expansion needs at least two vertices")
    n = g.n
    tails = g.tails.astype(np.uint64)
    heads = g.heads.astype(np.uint64)
    total = 1 << (n - 1)
    best = np.inf
    one = np.uint64(1)
    for start in range(1, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        sizes = np.bitwise_count(masks).astype(np.int64)
        cut = np.zeros(len(masks), dtype=np.int64)
        for u, v in zip(tails, heads):
            cut += (((masks >> u) ^ (masks >> v)) & one).astype(np.int64)
        ratio = cut / np.minimum(sizes, n - sizes)
        best = min(best, float(ratio.min()))
    return best
