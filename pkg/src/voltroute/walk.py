"""The flow walk: a unit flow read as a probability distribution over paths.

A walk starts at ``v`` with probability ``2 max(0, sigma_v) / sum |sigma|``
(``sigma = B* f``).  At ``u`` it moves along a directed edge carrying flow
``a`` with probability ``a / max(in_u, out_u)``; the leftover mass
``max(0, in_u - out_u) / max(in_u, out_u)`` is the probability of stopping
at ``u``.  For the unit electric ``(s, t)`` flow this is the electric walk,
and the probability of traversing an edge equals the flow on it.

Random numbers come from :func:`numpy.random.default_rng` (PCG64) seeded
with a 64-bit integer; independent streams are derived with
:meth:`numpy.random.SeedSequence.spawn`.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graph import GraphError, WeightedGraph, gradient_apply
from .routing import PotentialTable

ENUMERATION_CAP = 12
FLOW_RTOL = 1e-12


class WalkError(RuntimeError):
    pass


class Arc(NamedTuple):
    head: int
    edge: int
    amount: float


class WalkPath(NamedTuple):
    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    probability: float

    @property
    def length(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class WalkModel:
    g: WeightedGraph
    flow: np.ndarray
    arcs: tuple[tuple[Arc, ...], ...]
    in_total: np.ndarray
    out_total: np.ndarray
    start: np.ndarray
    exit: np.ndarray
    value: float
    acyclic: bool

    @property
    def n(self) -> int:
        return self.g.n

    def denominator(self, u: int) -> float:
        return float(max(self.in_total[u], self.out_total[u]))


def walk_model(g: WeightedGraph, f, require_acyclic: bool = False) -> WalkModel:
    """Build the flow walk of an edge flow ``f`` (canonical orientation).

    Edges carrying at most ``1e-12 * max|f|`` are dropped before directing,
    and vertex imbalances below ``1e-12`` of the largest throughput count as
    zero.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (g.m,):
        raise GraphError(f"edge flow has shape {f.shape}, expected ({g.m},)")
    peak = float(np.abs(f).max()) if g.m else 0.0
    if peak == 0.0:
        raise WalkError("the flow walk of a zero flow is undefined")
    tol = FLOW_RTOL * peak
    directed = np.where(np.abs(f) > tol, f, 0.0)
    arcs: list[list[Arc]] = [[] for _ in range(g.n)]
    in_total = np.zeros(g.n)
    out_total = np.zeros(g.n)
    for e, (u, v, a) in enumerate(zip(g.tails.tolist(), g.heads.tolist(), directed.tolist())):
        if a > 0:
            arcs[u].append(Arc(v, e, a))
        elif a < 0:
            u, v, a = v, u, -a
            arcs[u].append(Arc(v, e, a))
        else:
            continue
        out_total[u] += a
        in_total[v] += a
    for lst in arcs:
        lst.sort(key=lambda arc: (arc.head, arc.edge))
    den = np.maximum(in_total, out_total)
    sigma = out_total - in_total
    sigma[np.abs(sigma) <= FLOW_RTOL * den.max()] = 0.0  # conservation holds only up to rounding
    value = 0.5 * float(np.abs(sigma).sum())
    if value == 0.0:
        raise WalkError("the flow is a circulation; it has no source to start from")
    start = np.maximum(sigma, 0.0) / value
    exit_prob = np.divide(np.maximum(-sigma, 0.0), den, out=np.zeros(g.n), where=den > 0)
    acyclic = _is_acyclic(arcs)
    if require_acyclic and not acyclic:
        raise WalkError("directed flow graph has a cycle")
    return WalkModel(
        g, f, tuple(tuple(a) for a in arcs), in_total, out_total, start, exit_prob, value, acyclic
    )


def walk_model_from_potentials(g: WeightedGraph, phi) -> WalkModel:
    """Walk of the flow ``W B phi``; such flows run downhill, so the model must be acyclic."""
    return walk_model(g, g.weights * gradient_apply(g, phi), require_acyclic=True)


def _is_acyclic(arcs) -> bool:
    n = len(arcs)
    indeg = np.zeros(n, dtype=np.int64)
    for lst in arcs:
        for arc in lst:
            indeg[arc.head] += 1
    queue = deque(np.flatnonzero(indeg == 0).tolist())
    seen = 0
    while queue:
        u = queue.popleft()
        seen += 1
        for arc in arcs[u]:
            indeg[arc.head] -= 1
            if indeg[arc.head] == 0:
                queue.append(arc.head)
    return seen == n


def transition(model: WalkModel, u: int) -> tuple[dict[int, float], float]:
    """Successor distribution at ``u`` and the probability of stopping there."""
    den = model.denominator(u)
    if den == 0.0:
        raise WalkError(f"vertex {u} carries no flow; the walk cannot be there")
    probs: dict[int, float] = defaultdict(float)
    for arc in model.arcs[u]:
        probs[arc.head] += arc.amount / den
    return dict(probs), float(model.exit[u])


def path_probability(model: WalkModel, path) -> float:
    """Probability that the walk follows exactly the vertex sequence ``path`` and stops."""
    path = [int(x) for x in path]
    if not path:
        return 0.0
    p = float(model.start[path[0]])
    for u, v in zip(path[:-1], path[1:]):
        if p == 0.0:
            return 0.0
        den = model.denominator(u)
        p *= sum(arc.amount for arc in model.arcs[u] if arc.head == v) / den if den else 0.0
    return p * float(model.exit[path[-1]])


def sample_walk(model: WalkModel, rng: np.random.Generator, max_steps: int | None = None) -> WalkPath:
    if max_steps is None:
        max_steps = 10 * model.n * max(model.g.m, 1)
    u = int(rng.choice(model.n, p=model.start))
    vertices, edges = [u], []
    p = float(model.start[u])
    for _ in range(max_steps + 1):
        den = model.denominator(u)
        r = rng.random()
        acc = 0.0
        step = None
        for arc in model.arcs[u]:
            acc += arc.amount / den
            if r < acc:
                step = arc
                break
        if step is None and model.exit[u] == 0.0 and model.arcs[u]:
            step = model.arcs[u][-1]  # rounding left the cumulative sum just under 1
        if step is None:
            return WalkPath(tuple(vertices), tuple(edges), p * float(model.exit[u]))
        p *= step.amount / den
        u = step.head
        vertices.append(u)
        edges.append(step.edge)
    raise WalkError(f"walk exceeded {max_steps} steps")


def sample_lengths(model: WalkModel, rng: np.random.Generator, size: int, max_steps: int | None = None):
    """Sample ``size`` walks in lockstep; returns (edge counts, final vertices)."""
    if max_steps is None:
        max_steps = 10 * model.n * max(model.g.m, 1)
    width = max((len(a) for a in model.arcs), default=0)
    cum = np.full((model.n, width), np.inf)
    nxt = np.zeros((model.n, width), dtype=np.int64)
    fanout = np.array([len(a) for a in model.arcs], dtype=np.int64)
    for u, lst in enumerate(model.arcs):
        den = model.denominator(u)
        if lst:
            cum[u, : len(lst)] = np.cumsum([arc.amount for arc in lst]) / den
            if model.exit[u] == 0.0:
                cum[u, len(lst) - 1] = np.inf
            nxt[u, : len(lst)] = [arc.head for arc in lst]
    pos = rng.choice(model.n, size=size, p=model.start)
    lengths = np.zeros(size, dtype=np.int64)
    active = np.ones(size, dtype=bool)
    for _ in range(max_steps + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            return lengths, pos
        r = rng.random(idx.size)
        slot = (r[:, None] >= cum[pos[idx]]).sum(axis=1)
        moving = slot < fanout[pos[idx]]
        if width:
            slot_c = np.minimum(slot, width - 1)
            target = nxt[pos[idx], slot_c]
        else:
            target = pos[idx]
        stepped = idx[moving]
        pos[stepped] = target[moving]
        lengths[stepped] += 1
        active[idx[~moving]] = False
    raise WalkError(f"walk exceeded {max_steps} steps")


def enumerate_paths(model: WalkModel, cap: int = ENUMERATION_CAP) -> list[WalkPath]:
    """Every path with positive probability, by depth-first search over the flow DAG."""
    if model.n > cap:
        raise WalkError(f"path enumeration is capped at n={cap}, graph has n={model.n}")
    if not model.acyclic:
        raise WalkError("directed flow graph has a cycle; paths cannot be enumerated")
    out: list[WalkPath] = []

    def visit(u, p, vertices, edges):
        if model.exit[u] > 0:
            out.append(WalkPath(tuple(vertices), tuple(edges), p * float(model.exit[u])))
        den = model.denominator(u)
        for arc in model.arcs[u]:
            vertices.append(arc.head)
            edges.append(arc.edge)
            visit(arc.head, p * arc.amount / den, vertices, edges)
            vertices.pop()
            edges.pop()

    for s in np.flatnonzero(model.start > 0).tolist():
        visit(s, float(model.start[s]), [s], [])
    return out


def edge_marginals(model: WalkModel, paths: list[WalkPath] | None = None) -> np.ndarray:
    """Probability that the walk traverses each edge."""
    if paths is None:
        paths = enumerate_paths(model)
    marg = np.zeros(model.g.m)
    for path in paths:
        for e in path.edges:
            marg[e] += path.probability
    return marg


def expected_latency(model: WalkModel) -> float:
    """Expected number of edges traversed: ``sum_e |f_e|`` per unit of flow."""
    return sum(arc.amount for lst in model.arcs for arc in lst) / model.value


def total_variation(model_a: WalkModel, model_b: WalkModel, cap: int = ENUMERATION_CAP) -> float:
    """``sum_gamma |P_a(gamma) - P_b(gamma)|`` over the union of both path supports (not halved)."""
    pa = {(p.vertices, p.edges): p.probability for p in enumerate_paths(model_a, cap)}
    pb = {(p.vertices, p.edges): p.probability for p in enumerate_paths(model_b, cap)}
    return float(sum(abs(pa.get(key, 0.0) - pb.get(key, 0.0)) for key in pa.keys() | pb.keys()))


def short_edge_diagnostics(model: WalkModel, eps: float, paths: list[WalkPath] | None = None) -> dict:
    """Counts of short edges (flow at most ``eps``) and the mass of dominant paths.

    A path is dominant when it uses no short edge and both its start and stop
    probabilities are at least ``eps``.
    """
    if paths is None:
        paths = enumerate_paths(model)
    short = np.abs(model.flow) <= eps
    dominant = 0.0
    for path in paths:
        if any(short[e] for e in path.edges):
            continue
        if model.start[path.vertices[0]] >= eps and model.exit[path.vertices[-1]] >= eps:
            dominant += path.probability
    return {"eps": eps, "short_edges": int(short.sum()), "dominant_mass": dominant}


def perturbed_table(table: PotentialTable, nu: float, rng: np.random.Generator) -> PotentialTable:
    """Add to every table vector an independent random direction of 2-norm exactly ``nu``."""
    noise = rng.standard_normal(table.phi.shape)
    noise *= nu / np.linalg.norm(noise, axis=0)
    return PotentialTable(table.phi + noise, "perturbed")


def unit_walk(g: WeightedGraph, table: PotentialTable, s: int, t: int) -> WalkModel:
    """Walk for the unit ``(s, t)`` demand with potentials ``phi^[s] - phi^[t]`` read from ``table``."""
    return walk_model_from_potentials(g, table.vector(s) - table.vector(t))
