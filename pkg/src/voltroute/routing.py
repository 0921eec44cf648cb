"""Electric routing: flows, congestion, routing tables and competitive-ratio bounds.

Demand sets are ``(n, k)`` matrices whose columns are zero-sum demands;
multi-commodity flows are ``(m, k)`` matrices of signed edge flows in the
canonical orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .graph import (
    GraphError,
    WeightedGraph,
    diameter,
    divergence_apply,
    gradient_apply,
    vertex_expansion_exact,
)
from .solver import lplus_one_one_norm, one_one_norm, pinv_dense

DEMAND_RTOL = 1e-12


class DemandError(ValueError):
    pass


def point_demand(n: int, s: int, t: int, amount: float = 1.0) -> np.ndarray:
    """``amount * (chi_s - chi_t)``."""
    d = np.zeros(n)
    d[s] += amount
    d[t] -= amount
    return d


def check_demand(d, n: int | None = None, column: int | None = None) -> np.ndarray:
    """Validate a zero-sum demand; sums within ``1e-12 * ||d||_1`` are re-centered."""
    d = np.array(d, dtype=float)
    where = "" if column is None else f"demand column {column}: "
    if d.ndim != 1 or (n is not None and d.shape[0] != n):
        raise DemandError(f"{where}expected a vector of length {n}, got shape {d.shape}")
    total = d.sum()
    if total != 0.0:
        if abs(total) > DEMAND_RTOL * np.abs(d).sum():
            raise DemandError(f"{where}demand must sum to zero, sums to {total:.3e}")
        d -= d.mean()
    return d


def _as_columns(ds, n: int) -> np.ndarray:
    D = np.asarray(ds, dtype=float)
    if D.ndim == 1:
        D = D[:, None]
    if D.ndim != 2 or D.shape[0] != n:
        raise DemandError(f"demand set must have shape ({n}, k), got {D.shape}")
    if D.shape[1] == 0:
        raise DemandError("demand set is empty")
    return D


def electric_flow(g: WeightedGraph, d) -> np.ndarray:
    """Electric flow ``W B L^+ d`` routing the demand ``d``."""
    g.require_connected()
    d = check_demand(d, g.n)
    return g.weights * gradient_apply(g, pinv_dense(g) @ d)


def route_set(g: WeightedGraph, ds) -> np.ndarray:
    """Route every column independently; returns an ``(m, k)`` multi-flow."""
    g.require_connected()
    D = _as_columns(ds, g.n)
    cols = [check_demand(D[:, j], g.n, column=j) for j in range(D.shape[1])]
    P = pinv_dense(g)
    return np.column_stack([g.weights * gradient_apply(g, P @ d) for d in cols])


def congestion(g: WeightedGraph, mf) -> float:
    """``max_e sum_tau |f_{tau,e}| / w_e``."""
    F = np.asarray(mf, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if F.shape[0] != g.m:
        raise GraphError(f"multi-flow has {F.shape[0]} rows, expected {g.m}")
    return float((np.abs(F).sum(axis=1) / g.weights).max())


def edge_loads(g: WeightedGraph, mf) -> np.ndarray:
    F = np.asarray(mf, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    return np.abs(F).sum(axis=1)


def pi_matrix(g: WeightedGraph) -> np.ndarray:
    """``W^{1/2} B L^+ B* W^{1/2}``, an orthogonal projection on edge space."""
    g.require_connected()
    B = g.incidence().toarray()
    root = np.sqrt(g.weights)
    return root[:, None] * (B @ pinv_dense(g) @ B.T) * root[None, :]


def worst_case_demands(g: WeightedGraph) -> np.ndarray:
    """One column per edge: ``w_e (chi_tail - chi_head)``."""
    g.require_connected()
    D = np.zeros((g.n, g.m))
    cols = np.arange(g.m)
    D[g.tails, cols] = g.weights
    D[g.heads, cols] = -g.weights
    return D


def competitive_bound(g: WeightedGraph) -> float:
    """Certified upper bound ``||W^{1/2} Pi W^{-1/2}||_{1->1}`` on the competitive ratio."""
    root = np.sqrt(g.weights)
    return one_one_norm(root[:, None] * pi_matrix(g) / root[None, :])


def witness_ratio(g: WeightedGraph, witness) -> float:
    """Electric congestion over witness congestion for the demands the witness routes.

    Any multi-flow ``witness`` gives a lower bound on the competitive ratio.
    """
    F = np.asarray(witness, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    demands = divergence_apply(g, F)
    return congestion(g, route_set(g, demands)) / congestion(g, F)


# -- routing tables ---------------------------------------------------------


@dataclass(frozen=True)
class PotentialTable:
    """Column ``v`` of ``phi`` is the potential vector ``phi^[v] ~ L^+ chi_v``."""

    phi: np.ndarray
    provenance: Literal["exact", "series", "symmetrized", "perturbed"] = "exact"
    k: int | None = None

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    def vector(self, v: int) -> np.ndarray:
        return self.phi[:, v]

    def potentials(self, d) -> np.ndarray:
        """Potentials ``sum_v d_v phi^[v]`` inducing the flow of demand ``d``."""
        return self.phi @ np.asarray(d, dtype=float)


def exact_table(g: WeightedGraph) -> PotentialTable:
    return PotentialTable(np.array(pinv_dense(g)), "exact")


def forward_coefficient(table: PotentialTable, s: int, t: int, u: int, v: int) -> float:
    """Potential drop from ``u`` to ``v`` under the unit ``(s, t)`` demand.

    ``(phi^[u]_s - phi^[u]_t) - (phi^[v]_s - phi^[v]_t)``; only the tables of
    ``u`` and ``v`` are read.
    """
    n = table.n
    for x in (s, t, u, v):
        if not 0 <= x < n:
            raise GraphError(f"vertex {x} not covered by a table of size {n}")
    if u == v:
        raise GraphError("forward coefficient needs two distinct vertices")
    pu, pv = table.vector(u), table.vector(v)
    return float((pu[s] - pu[t]) - (pv[s] - pv[t]))


def edge_flow_coefficient(table: PotentialTable, g: WeightedGraph, s: int, t: int, u: int, v: int) -> float:
    """Flow from ``u`` to ``v`` under the unit ``(s, t)`` demand.

    The potential drop times the total conductance between ``u`` and ``v``.
    """
    w = sum(float(g.weights[inc.edge]) for inc in g.adjacency(u) if inc.neighbor == v)
    if w == 0.0:
        raise GraphError(f"({u}, {v}) is not an edge")
    return w * forward_coefficient(table, s, t, u, v)


# -- closed-form bounds -----------------------------------------------------


class ExpansionBound(NamedTuple):
    value: float
    degenerate: bool
    alpha: float
    d_max: int


def eta_expansion_bound(g: WeightedGraph, alpha: float | None = None) -> ExpansionBound:
    """``4 ln(n/2) / (alpha ln(2 d_max / (2 d_max - alpha)))``.

    For ``n = 2`` the logarithm vanishes and the value 0 is flagged degenerate.
    """
    if not g.is_unweighted:
        raise GraphError("the expansion bound is implemented for unweighted graphs only")
    if alpha is None:
        alpha = vertex_expansion_exact(g)
    dm = g.max_degree
    log_n = math.log(g.n / 2)
    if log_n <= 0.0:
        return ExpansionBound(0.0, True, alpha, dm)
    return ExpansionBound(4.0 * log_n / (alpha * math.log(2 * dm / (2 * dm - alpha))), False, alpha, dm)


def lplus_diameter_lower_bound(g: WeightedGraph) -> float:
    """``2 D / d_max`` with ``D`` the hop diameter."""
    if not g.is_unweighted:
        raise GraphError("the diameter bound is implemented for unweighted graphs only")
    return 2.0 * diameter(g) / g.max_degree


def lplus_diameter_certified_bound(g: WeightedGraph) -> float:
    """``D / (2 d_max)``, the bound that follows from ``||f||_1 <= 2 d_max ||L^+||_{1->1}``."""
    if not g.is_unweighted:
        raise GraphError("the diameter bound is implemented for unweighted graphs only")
    return diameter(g) / (2.0 * g.max_degree)


def universal_cap(g: WeightedGraph) -> float:
    """``sqrt(m)``, which caps ``||Pi||_{1->1}``."""
    return math.sqrt(g.m)


def bound_summary(g: WeightedGraph, alpha: float | None = None) -> dict:
    """All congestion-related quantities of an unweighted graph in one dict."""
    exp_bound = eta_expansion_bound(g, alpha)
    return {
        "n": g.n,
        "m": g.m,
        "d_max": g.max_degree,
        "alpha": exp_bound.alpha,
        "competitive_bound": competitive_bound(g),
        "eta_expansion_bound": exp_bound.value,
        "eta_expansion_degenerate": exp_bound.degenerate,
        "lplus_one_one_norm": lplus_one_one_norm(g),
        "lplus_diameter_lower_bound": lplus_diameter_lower_bound(g),
        "lplus_diameter_certified_bound": lplus_diameter_certified_bound(g),
        "sqrt_m": universal_cap(g),
    }
