"""Synchronous message-passing simulation of the routing-table computation.

Every vertex is a processor that knows only its id, ``n``, its incident
edges and their weights (plus the shared degree bound ``tau`` in the plain
protocol).  In each round every vertex sends one payload of ``n`` reals
along each incident edge and then updates its state from what it received.
After ``k`` compute rounds vertex ``u`` holds its table row
``(zeta^[1]_u, ..., zeta^[n]_u)``; a final round hands that row to all
neighbors.

Arithmetic follows :class:`voltroute.solver.LocalOperator` term by term,
so the tables equal the centralized series bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .graph import GraphError, WeightedGraph, fiedler_eigenvalue
from .routing import PotentialTable
from .solver import default_tau, local_weighted_degree, series_degree_for


class MessageRecord(NamedTuple):
    round: int
    edge: int
    sender: int
    receiver: int
    size: int


class Delivery(NamedTuple):
    sender: int
    edge: int
    payload: np.ndarray


class SyncNetwork:
    """Lockstep rounds; payloads travel only along graph edges."""

    def __init__(self, g: WeightedGraph):
        self.g = g
        self.round = 0
        self.log: list[MessageRecord] = []

    def exchange(self, payloads: list[np.ndarray]) -> list[list[Delivery]]:
        """Every vertex sends ``payloads[u]`` over each incident edge.

        Inboxes are ordered by (sender id, edge id).
        """
        g = self.g
        if len(payloads) != g.n:
            raise ValueError(f"expected {g.n} payloads, got {len(payloads)}")
        inbox: list[list[Delivery]] = [[] for _ in range(g.n)]
        for receiver in range(g.n):
            for inc in g.adjacency(receiver):
                sent = payloads[inc.neighbor]
                inbox[receiver].append(Delivery(inc.neighbor, inc.edge, sent))
                self.log.append(MessageRecord(self.round, inc.edge, inc.neighbor, receiver, int(np.size(sent))))
        self.round += 1
        return inbox


class LocalView(NamedTuple):
    """Everything a processor may read about the network."""

    vertex: int
    n: int
    incident: tuple[tuple[int, int, float], ...]  # (neighbor, edge, weight) by (neighbor, edge)


def _views(g: WeightedGraph) -> list[LocalView]:
    return [
        LocalView(u, g.n, tuple((inc.neighbor, inc.edge, float(g.weights[inc.edge])) for inc in g.adjacency(u)))
        for u in range(g.n)
    ]


def _initial_row(view: LocalView) -> np.ndarray:
    x = np.zeros(view.n)
    x[view.vertex] = 1.0
    return x - 1.0 / view.n


class PlainProcessor:
    """Runs ``x <- (I - L/tau) x`` locally; ``tau`` is the agreed degree bound."""

    def __init__(self, view: LocalView, tau: float):
        self.view = view
        self.tau = tau
        wdeg = local_weighted_degree(w for _, _, w in view.incident)
        self.self_coef = 1.0 - wdeg / tau
        self.coefs = [w / tau for _, _, w in view.incident]
        self.term = _initial_row(view)
        self.total = self.term.copy()

    def outgoing(self) -> np.ndarray:
        return self.term

    def step(self, inbox: list[Delivery]) -> None:
        acc = self.self_coef * self.term
        for coef, msg in zip(self.coefs, inbox):
            acc = acc + coef * msg.payload
        self.term = acc
        self.total = self.total + acc

    def row(self) -> np.ndarray:
        return self.total / self.tau


class SymmetrizedProcessor:
    """Runs ``x <- (I - N/3) x`` with ``N`` the normalized Laplacian; reads only its own degree."""

    def __init__(self, view: LocalView):
        self.view = view
        root = math.sqrt(local_weighted_degree(w for _, _, w in view.incident))
        self.self_coef = 1.0 - 1.0 / 3.0
        self.send_scale = 1.0 / root
        self.coefs = [w / (3.0 * root) for _, _, w in view.incident]
        self.term = _initial_row(view) * self.send_scale
        self.total = self.term.copy()

    def outgoing(self) -> np.ndarray:
        return self.term * self.send_scale

    def step(self, inbox: list[Delivery]) -> None:
        acc = self.self_coef * self.term
        for coef, msg in zip(self.coefs, inbox):
            acc = acc + coef * msg.payload
        self.term = acc
        self.total = self.total + acc

    def row(self) -> np.ndarray:
        return (self.total / 3.0) * self.send_scale


@dataclass
class TableResult:
    g: WeightedGraph
    k: int
    mode: str
    tables: np.ndarray
    held: list[dict[int, np.ndarray]]
    rounds_used: int
    total_messages: int
    max_payload_reals: int
    log: list[MessageRecord] = field(repr=False)

    def potential_table(self) -> PotentialTable:
        """Table whose vector for ``u`` is the row computed at ``u``."""
        return PotentialTable(self.tables.T.copy(), "series" if self.mode == "plain" else "symmetrized", self.k)

    def local_forward_coefficient(self, u: int, v: int, s: int, t: int) -> float:
        """Forwarding coefficient evaluated at ``u`` from the rows it holds."""
        mine = self.held[u]
        if v not in mine:
            raise GraphError(f"vertex {u} holds no table for {v}; only neighbors are exchanged")
        pu, pv = mine[u], mine[v]
        return float((pu[s] - pu[t]) - (pv[s] - pv[t]))


def _run(g: WeightedGraph, processors, k: int, mode: str, post=None) -> TableResult:
    if k < 0:
        raise ValueError(f"number of rounds must be nonnegative, got {k}")
    g.require_connected()
    net = SyncNetwork(g)
    for _ in range(k):
        inboxes = net.exchange([p.outgoing() for p in processors])
        for proc, inbox in zip(processors, inboxes):
            proc.step(inbox)
    tables = np.vstack([p.row() for p in processors])  # row u computed at u
    if post is not None:
        tables = post(tables)
    inboxes = net.exchange([tables[u] for u in range(g.n)])
    held = []
    for u, inbox in enumerate(inboxes):
        mine = {u: tables[u]}
        for msg in inbox:
            mine[msg.sender] = msg.payload
        held.append(mine)
    return TableResult(
        g,
        k,
        mode,
        tables,
        held,
        rounds_used=net.round,
        total_messages=len(net.log),
        max_payload_reals=max((rec.size for rec in net.log), default=0),
        log=net.log,
    )


def simulate_tables(g: WeightedGraph, k: int, tau: float | None = None) -> TableResult:
    """``k`` rounds of the plain series plus one exchange round.

    ``tables[u, w]`` is ``zeta^[w]_u``, the series value of ``L^+ chi_w`` at ``u``.
    """
    tau = default_tau(g) if tau is None else tau
    return _run(g, [PlainProcessor(view, tau) for view in _views(g)], k, "plain")


def simulate_tables_symmetrized(g: WeightedGraph, k: int, center: bool = True) -> TableResult:
    """``k`` rounds of the normalized-Laplacian series plus one exchange round.

    Without ``center`` each table column is off from ``L^+ chi_w`` by a
    constant, which cancels in every forwarding coefficient.  Centering is a
    global reduction applied after the compute rounds and is not counted as
    message traffic.
    """
    post = (lambda Z: Z - Z.mean(axis=0)) if center else None
    return _run(g, [SymmetrizedProcessor(view) for view in _views(g)], k, "symmetrized", post)


def accounting(result: TableResult) -> dict:
    """Round and message counters, next to the degree the error bound asks for at ``eps = n^-5``."""
    g = result.g
    out = {
        "k": result.k,
        "rounds": result.rounds_used,
        "messages": result.total_messages,
        "payload": result.max_payload_reals,
        "expected_messages": 2 * g.m * (result.k + 1),
    }
    if result.mode == "plain" and g.n > 1:
        out["k_for_n_pow_minus5"] = series_degree_for(fiedler_eigenvalue(g), default_tau(g), float(g.n) ** -5)
    return out


def locality_violations(result: TableResult) -> list[MessageRecord]:
    """Logged messages whose endpoints are not joined by the logged edge."""
    g = result.g
    bad = []
    for rec in result.log:
        ends = {int(g.tails[rec.edge]), int(g.heads[rec.edge])}
        if ends != {rec.sender, rec.receiver}:
            bad.append(rec)
    return bad
