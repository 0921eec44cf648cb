"""Concurrent flow cutting and the edge-removal robustness experiments.

For the unit electric ``(s, t)`` flow with potentials ``psi``, every level
set ``{v : psi_v <= c}`` strictly between the extreme potentials is crossed
by edges whose flows sum to exactly one.  :func:`cut_sequence` walks such
level cuts downwards from the median, stepping by twice the mean crossing
flow, and :func:`verify_cut_bounds` checks the shrinkage and amortization
inequalities that bound ``||psi||_1`` through vertex expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import NamedTuple

import numpy as np

from .graph import GraphError, WeightedGraph, fiedler_eigenvalue, vertex_expansion_exact
from .routing import competitive_bound, electric_flow, point_demand, route_set
from .solver import lplus_one_one_norm, pinv_dense

TOL = 1e-9


class CutBoundViolation(AssertionError):
    def __init__(self, failures: list[dict]):
        first = failures[0]
        super().__init__(
            f"{len(failures)} cut bound(s) violated; first: {first['check']} at i={first['i']} "
            f"({first['lhs']:.6g} vs {first['rhs']:.6g})"
        )
        self.failures = failures


@dataclass
class CutSequence:
    s: int
    t: int
    psi: np.ndarray
    negated: bool
    median_at_zero: bool
    levels: list[float] = field(default_factory=list)
    sets: list[tuple[int, ...]] = field(default_factory=list)
    crossing: list[tuple[int, ...]] = field(default_factory=list)
    flows: list[np.ndarray] = field(default_factory=list)
    deltas: list[float] = field(default_factory=list)

    @property
    def r(self) -> int:
        """Index of the last nonempty cut."""
        return len(self.sets) - 2

    @property
    def sizes(self) -> list[int]:
        return [len(S) for S in self.sets]

    @property
    def counts(self) -> list[int]:
        return [len(c) for c in self.crossing]

    def flow_sums(self) -> list[float]:
        return [float(p.sum()) for p in self.flows]

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "t": self.t,
            "negated": self.negated,
            "median_at_zero": self.median_at_zero,
            "r": self.r,
            "c": self.levels,
            "n": self.sizes,
            "k": self.counts,
            "delta": self.deltas,
            "flow_sum": self.flow_sums(),
            "sets": [list(S) for S in self.sets],
        }


def _crossing(g: WeightedGraph, inside: np.ndarray) -> np.ndarray:
    return np.flatnonzero(inside[g.tails] != inside[g.heads])


def cut_sequence(g: WeightedGraph, s: int, t: int) -> CutSequence:
    """Level cuts of ``psi = L^+ (chi_s - chi_t)`` from the median downwards.

    Ties in ``psi`` are broken by vertex id.  If the median level is negative
    ``psi`` is negated first so that the median is nonnegative.
    """
    if s == t:
        raise GraphError("cut sequence needs s != t")
    g.require_connected()
    n = g.n
    psi = pinv_dense(g) @ point_demand(n, s, t)
    c0 = _median_level(psi)
    zero = abs(c0) <= 1e-12 * float(np.abs(psi).max())
    negated = False
    if c0 < 0 and not zero:
        psi = -psi
        negated = True
        c0 = _median_level(psi)
    flows = np.abs(g.weights * (psi[g.tails] - psi[g.heads]))

    order = np.lexsort((np.arange(n), psi))
    inside = np.zeros(n, dtype=bool)
    inside[order[: n // 2]] = True  # odd n: strictly below the middle vertex
    seq = CutSequence(s, t, psi, negated, zero)
    c = c0
    while True:
        cross = _crossing(g, inside)
        seq.levels.append(float(c))
        seq.sets.append(tuple(np.flatnonzero(inside).tolist()))
        seq.crossing.append(tuple(cross.tolist()))
        seq.flows.append(flows[cross])
        if not inside.any():
            break
        if cross.size == 0:
            raise GraphError("a proper level set has no crossing edges; graph is disconnected")
        delta = 2.0 * float(flows[cross].sum()) / cross.size
        seq.deltas.append(delta)
        c = c - delta
        inside &= psi <= c
    return seq


def _median_level(psi: np.ndarray) -> float:
    n = len(psi)
    ranked = psi[np.lexsort((np.arange(n), psi))]
    if n % 2 == 0:
        return 0.5 * float(ranked[n // 2 - 1] + ranked[n // 2])
    return float(ranked[n // 2])


@dataclass
class CutReport:
    alpha: float
    d_max: int
    theta: float
    r: int
    r_bound: float
    psi_l1: float
    chain_bound: float
    closed_form_bound: float
    checks: list[dict]

    @property
    def failures(self) -> list[dict]:
        """Violated asserted checks; diagnostic checks never count."""
        return [c for c in self.checks if c["asserted"] and not c["ok"]]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "d_max": self.d_max,
            "theta": self.theta,
            "r": self.r,
            "r_bound": self.r_bound,
            "psi_l1": self.psi_l1,
            "chain_bound": self.chain_bound,
            "closed_form_bound": self.closed_form_bound,
            "passed": self.passed,
            "checks": self.checks,
        }


def verify_cut_bounds(
    g: WeightedGraph, cs: CutSequence, alpha: float | None = None, strict: bool = False
) -> CutReport:
    """Check every per-cut inequality of the flow-cutting argument.

    With ``strict=True`` a violation raises :class:`CutBoundViolation`.
    """
    if alpha is None:
        alpha = vertex_expansion_exact(g)
    n, dm = g.n, g.max_degree
    if not 0 < alpha <= 2 * dm:
        raise ValueError(f"vertex expansion must lie in (0, 2*d_max], got {alpha}")
    theta = 1.0 - alpha / (2.0 * dm)
    r_bound = math.log(n / 2) / math.log(1.0 / theta) if n > 2 else 0.0
    sizes, counts = cs.sizes, cs.counts
    checks = []

    def check(name, i, lhs, rhs, ok, asserted=True):
        checks.append(
            {"check": name, "i": i, "lhs": float(lhs), "rhs": float(rhs), "ok": bool(ok), "asserted": asserted}
        )

    check("smaller_side", 0, sizes[0], n / 2, sizes[0] <= n / 2)
    for i in range(cs.r + 1):
        total = float(cs.flows[i].sum())
        check("unit_crossing_flow", i, total, 1.0, abs(total - 1.0) <= TOL)
        check("isoperimetry", i, counts[i] / sizes[i], alpha, counts[i] / sizes[i] >= alpha - TOL)
        shrink = sizes[i] * theta
        check("shrinkage", i, sizes[i + 1], shrink, sizes[i + 1] <= shrink + TOL)
        cap = 2.0 / (alpha * sizes[i])
        check("step_size", i, cs.deltas[i], cap, cs.deltas[i] <= cap + TOL)
    check("cut_count", cs.r, cs.r, r_bound, cs.r <= r_bound + TOL)
    psi_l1 = float(np.abs(cs.psi).sum())
    chain = 4.0 / alpha * (cs.r + 1)
    closed_form = 4.0 * math.log(n / 2) / (alpha * math.log(1.0 / theta)) if n > 2 else 0.0
    check("potential_l1", cs.r, psi_l1, chain, psi_l1 <= chain + TOL)
    # (4/alpha)(r+1) exceeds the closed form by up to one cut; reported, not asserted
    check("chain_vs_closed_form", cs.r, chain, closed_form, chain <= closed_form + TOL, asserted=False)
    report = CutReport(alpha, dm, theta, cs.r, r_bound, psi_l1, chain, closed_form, checks)
    if strict and not report.passed:
        raise CutBoundViolation(report.failures)
    return report


def level_crossing_flow(g: WeightedGraph, psi, level: float) -> float:
    """Total absolute flow ``W B psi`` on edges separating ``psi <= level`` from the rest."""
    psi = np.asarray(psi, dtype=float)
    inside = psi <= level
    cross = _crossing(g, inside)
    return float(np.abs(g.weights[cross] * (psi[g.tails[cross]] - psi[g.heads[cross]])).sum())


def reformulation_chain(g: WeightedGraph) -> tuple[float, float, float]:
    """``(||L^+||_{1->1}, max_w ||L^+ chi_w||_1, (n-1)/n * max_{s!=t} ||L^+(chi_s - chi_t)||_1)``."""
    P = pinv_dense(g)
    col = float(np.abs(P).sum(axis=0).max())
    pair = max(float(np.abs(P[:, s] - P[:, t]).sum()) for s, t in combinations(range(g.n), 2))
    return lplus_one_one_norm(g), col, (g.n - 1) / g.n * pair


# -- robustness -------------------------------------------------------------


class HeavyEdgeSet(NamedTuple):
    p: float
    edges: frozenset[int]

    def __len__(self) -> int:
        return len(self.edges)


def heavy_edge_set(f, p: float) -> HeavyEdgeSet:
    """Edges whose absolute flow is at least ``p``."""
    f = np.abs(np.asarray(f, dtype=float))
    return HeavyEdgeSet(float(p), frozenset(np.flatnonzero(f >= p).tolist()))


def robust1_check(
    g: WeightedGraph,
    s: int,
    t: int,
    p: float,
    fiedler: float | None = None,
    lplus_norm: float | None = None,
) -> dict:
    """Compare ``|Q_p|`` with ``min(2/(lambda p^2), 2 d_max ||L^+||_{1->1} / p)``."""
    if not 0 < p <= 1:
        raise ValueError(f"threshold p must lie in (0, 1], got {p}")
    f = electric_flow(g, point_demand(g.n, s, t))
    heavy = heavy_edge_set(f, p)
    lam = fiedler_eigenvalue(g) if fiedler is None else fiedler
    norm = lplus_one_one_norm(g) if lplus_norm is None else lplus_norm
    spectral = 2.0 / (lam * p * p)
    l1 = 2.0 * g.max_degree * norm / p
    bound = min(spectral, l1)
    return {
        "s": s,
        "t": t,
        "p": p,
        "size": len(heavy),
        "edges": sorted(heavy.edges),
        "spectral_bound": spectral,
        "norm_bound": l1,
        "ok": len(heavy) <= bound + TOL,
    }


def path_decomposition(g: WeightedGraph, f, max_rounds: int | None = None) -> list[tuple[tuple[int, ...], float]]:
    """Greedy decomposition of a unit ``(s, t)`` flow into weighted ``s -> t`` paths.

    Each round follows the largest residual outgoing flow from ``s`` until
    ``t`` and subtracts the bottleneck.
    """
    f = np.asarray(f, dtype=float)
    peak = float(np.abs(f).max())
    tol = 1e-12 * max(peak, 1.0)
    residual = np.where(np.abs(f) > tol, f, 0.0)
    sigma = np.zeros(g.n)
    np.add.at(sigma, g.tails, residual)
    np.subtract.at(sigma, g.heads, residual)
    s, t = int(np.argmax(sigma)), int(np.argmin(sigma))
    if max_rounds is None:
        max_rounds = g.n * g.m
    paths = []
    for _ in range(max_rounds):
        if not np.any(np.abs(residual) > tol):
            break
        u, vertices, edges = s, [s], []
        while u != t:
            best, best_edge, best_next = 0.0, -1, -1
            for inc in g.adjacency(u):
                a = residual[inc.edge] * inc.sign
                if a > best:
                    best, best_edge, best_next = a, inc.edge, inc.neighbor
            if best_edge < 0:
                break
            edges.append(best_edge)
            vertices.append(best_next)
            u = best_next
            if len(edges) > g.n:
                raise GraphError("flow has a directed cycle; it cannot be decomposed into paths")
        if u != t:
            # dead end: the last edge only carried rounding residue
            if not edges:
                break
            residual[edges[-1]] = 0.0
            continue
        value = min(abs(residual[e]) for e in edges)
        for e in edges:
            residual[e] -= math.copysign(value, residual[e])
            if abs(residual[e]) <= tol:
                residual[e] = 0.0
        paths.append((tuple(vertices), value))
    leftover = float(np.abs(residual).max()) if g.m else 0.0
    if leftover > 1e-6:
        raise GraphError(f"residual flow {leftover:.3e} remains after {max_rounds} extractions")
    return paths


def uniform_demands(n: int) -> np.ndarray:
    """One unit demand per unordered vertex pair, as columns."""
    pairs = list(combinations(range(n), 2))
    D = np.zeros((n, len(pairs)))
    for j, (s, t) in enumerate(pairs):
        D[s, j] = 1.0
        D[t, j] = -1.0
    return D


def removal_experiment(
    g: WeightedGraph,
    x: float,
    seed=None,
    alpha: float | None = None,
    eta: float | None = None,
    edges=None,
) -> dict:
    """Route all-pairs unit demands electrically, then delete edges.

    ``ceil(x m)`` edges are drawn uniformly without replacement (or ``edges``
    are removed as given).  The removed fraction counts every unit of flow on
    a removed edge, over the total demand ``n(n-1)/2``; it is compared with
    ``x * eta * d_max * ln(n) / alpha``.
    """
    if not 0 < x <= 1:
        raise ValueError(f"removal fraction must lie in (0, 1], got {x}")
    if alpha is None:
        alpha = vertex_expansion_exact(g)
    if eta is None:
        eta = competitive_bound(g)
    loads = np.abs(route_set(g, uniform_demands(g.n))).sum(axis=1)
    if edges is None:
        rng = np.random.default_rng(seed)
        removed = np.sort(rng.choice(g.m, size=math.ceil(x * g.m), replace=False))
    else:
        removed = np.array(sorted(set(int(e) for e in edges)), dtype=np.int64)
    total = g.n * (g.n - 1) / 2
    fraction = float(loads[removed].sum()) / total
    bound = x * eta * g.max_degree * math.log(g.n) / alpha
    return {
        "x": x,
        "seed": seed,
        "removed_edges": removed.tolist(),
        "removed_fraction": fraction,
        "bound": bound,
        "eta": eta,
        "alpha": alpha,
        "d_max": g.max_degree,
        "ok": fraction <= bound + TOL,
    }
