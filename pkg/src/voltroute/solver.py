"""Applying the Laplacian pseudo-inverse.

Two routes are provided: a dense eigendecomposition oracle, and the
truncated power series

    L^+ y  ~  (1/tau) * sum_{w=0..k} (I - L/tau)^w y,      tau = 2 * max weighted degree

together with its degree-normalized variant, which needs no global degree
bound.  Both series are evaluated through :class:`LocalOperator`, a
vertex-local stencil with a fixed summation order (self term first, then
incident edges by ascending neighbor id, then edge id).  The distributed
simulator uses the same stencil, which makes its tables bitwise equal to
the centralized evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal

import numpy as np

from .graph import GraphError, WeightedGraph, laplacian_dense

ZERO_EIGENVALUE_RTOL = 1e-9


@dataclass(frozen=True)
class PinvOracle:
    """Dense ``L^+`` built from a symmetric eigendecomposition."""

    matrix: np.ndarray

    @classmethod
    def from_graph(cls, g: WeightedGraph) -> "PinvOracle":
        return cls(pinv_dense(g))

    def apply(self, y) -> np.ndarray:
        return self.matrix @ np.asarray(y, dtype=float)


@lru_cache(maxsize=128)
def _pinv_cached(g: WeightedGraph) -> np.ndarray:
    g.require_connected()
    evals, evecs = np.linalg.eigh(laplacian_dense(g))
    cutoff = ZERO_EIGENVALUE_RTOL * max(evals[-1], 0.0)
    inv = np.zeros_like(evals)
    keep = evals > cutoff
    inv[keep] = 1.0 / evals[keep]
    P = (evecs * inv) @ evecs.T
    P = 0.5 * (P + P.T)
    P.setflags(write=False)
    return P


def pinv_dense(g: WeightedGraph) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of ``L``; eigenvalues below 1e-9 * lambda_max count as zero."""
    return _pinv_cached(g)


def pinv_apply(oracle: PinvOracle | WeightedGraph, y) -> np.ndarray:
    if isinstance(oracle, WeightedGraph):
        oracle = PinvOracle.from_graph(oracle)
    return oracle.apply(y)


def one_one_norm(A) -> float:
    """``||A||_{1->1}``: the largest absolute column sum."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return float(np.abs(A).sum(axis=0).max())


def lplus_one_one_norm(g: WeightedGraph) -> float:
    return one_one_norm(pinv_dense(g))


# -- local stencils --------------------------------------------------------


def local_weighted_degree(incident_weights) -> float:
    """Sum incident weights left to right; every caller must use this order."""
    total = 0.0
    for w in incident_weights:
        total = total + w
    return total


@dataclass(frozen=True)
class LocalOperator:
    """``x -> self_coef * x + sum_e coef_e * send_scale[nbr_e] * x[nbr_e]`` per vertex.

    ``neighbors[u]`` lists ``(neighbor, coef)`` in summation order.
    ``slots`` regroups the same terms by position so that all vertices can be
    updated at once without changing any vertex's sequence of operations.
    """

    self_coef: np.ndarray
    neighbors: tuple[tuple[tuple[int, float], ...], ...]
    send_scale: np.ndarray | None
    slots: tuple[tuple[np.ndarray, np.ndarray, np.ndarray], ...]

    @classmethod
    def build(cls, self_coef, neighbors, send_scale=None) -> "LocalOperator":
        neighbors = tuple(tuple(row) for row in neighbors)
        depth = max((len(row) for row in neighbors), default=0)
        slots = []
        for j in range(depth):
            rows = [u for u, row in enumerate(neighbors) if len(row) > j]
            slots.append(
                (
                    np.array(rows, dtype=np.int64),
                    np.array([neighbors[u][j][0] for u in rows], dtype=np.int64),
                    np.array([neighbors[u][j][1] for u in rows], dtype=float),
                )
            )
        return cls(np.asarray(self_coef, dtype=float), neighbors, send_scale, tuple(slots))

    def outgoing(self, X: np.ndarray) -> np.ndarray:
        if self.send_scale is None:
            return X
        return X * _bcast(self.send_scale, X)

    def apply(self, X: np.ndarray) -> np.ndarray:
        msg = self.outgoing(X)
        acc = _bcast(self.self_coef, X) * X
        for rows, nbrs, coefs in self.slots:
            acc[rows] = acc[rows] + _bcast(coefs, X) * msg[nbrs]
        return acc


def _bcast(v: np.ndarray, X: np.ndarray) -> np.ndarray:
    return v if X.ndim == 1 else v[:, None]


def plain_operator(g: WeightedGraph, tau: float) -> LocalOperator:
    """Stencil of ``M = I - L/tau``."""
    self_coef = np.empty(g.n)
    neighbors = []
    for u in range(g.n):
        adj = g.adjacency(u)
        wdeg = local_weighted_degree(float(g.weights[inc.edge]) for inc in adj)
        self_coef[u] = 1.0 - wdeg / tau
        neighbors.append([(inc.neighbor, float(g.weights[inc.edge]) / tau) for inc in adj])
    return LocalOperator.build(self_coef, neighbors)


def normalized_operator(g: WeightedGraph) -> LocalOperator:
    """Stencil of ``I - N/3`` with ``N = D^{-1/2} L D^{-1/2}``.

    Each vertex scales what it sends by ``1/sqrt(deg)`` of its own degree, so
    the receiver only needs its own degree too.
    """
    self_coef = np.empty(g.n)
    send_scale = np.empty(g.n)
    neighbors = []
    for u in range(g.n):
        adj = g.adjacency(u)
        root = math.sqrt(local_weighted_degree(float(g.weights[inc.edge]) for inc in adj))
        self_coef[u] = 1.0 - 1.0 / 3.0
        send_scale[u] = 1.0 / root
        neighbors.append([(inc.neighbor, float(g.weights[inc.edge]) / (3.0 * root)) for inc in adj])
    return LocalOperator.build(self_coef, neighbors, send_scale)


def accumulate_series(op: LocalOperator, X0: np.ndarray, k: int) -> np.ndarray:
    """``sum_{w=0..k} op^w X0``, summed in order of increasing ``w``."""
    if k < 0:
        raise ValueError(f"series degree must be nonnegative, got {k}")
    term = np.array(X0, dtype=float)
    total = term.copy()
    for _ in range(k):
        term = op.apply(term)
        total = total + term
    return total


def centered_basis(n: int) -> np.ndarray:
    """Columns ``chi_w - 1/n``: the basis vectors projected off the constants."""
    return np.eye(n) - 1.0 / n


# -- series solvers --------------------------------------------------------


@dataclass(frozen=True)
class SeriesPlan:
    k: int
    tau: float
    mode: Literal["plain", "normalized"] = "plain"

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"series degree must be nonnegative, got {self.k}")

    @classmethod
    def for_graph(cls, g: WeightedGraph, k: int) -> "SeriesPlan":
        return cls(k=k, tau=default_tau(g))


def default_tau(g: WeightedGraph) -> float:
    """``2 * max weighted degree``, an upper bound on the largest Laplacian eigenvalue."""
    return 2.0 * float(g.weighted_degrees().max())


def series_apply(g: WeightedGraph, y, plan: SeriesPlan) -> np.ndarray:
    """``(1/tau) * sum_{w=0..k} (I - L/tau)^w y`` for a vector or a matrix of columns.

    ``y`` is not projected; the constant component grows like ``(k+1)/tau``.
    """
    if plan.mode != "plain":
        raise ValueError("series_apply evaluates the plain series; use normalized_series_apply")
    y = np.asarray(y, dtype=float)
    if y.shape[0] != g.n:
        raise GraphError(f"vertex vector has length {y.shape[0]}, expected {g.n}")
    total = accumulate_series(plain_operator(g, plan.tau), y, plan.k)
    return total / plan.tau


def series_tables(g: WeightedGraph, k: int, tau: float | None = None) -> np.ndarray:
    """Series approximations of every ``L^+ chi_w`` as the columns of an n x n matrix."""
    tau = default_tau(g) if tau is None else tau
    return series_apply(g, centered_basis(g.n), SeriesPlan(k, tau))


def series_degree_for(lambda_min: float, tau: float, eps: float) -> int:
    """Smallest degree ``k`` whose series error is at most ``eps`` for unit ``y`` orthogonal to 1.

    With ``kappa = tau/lambda_min`` the tail is bounded by
    ``kappa (1 - 1/kappa)^(k+1) / tau``, giving
    ``k = ceil(ln(kappa/(tau*eps)) / ln(kappa/(kappa-1)))``.
    """
    if lambda_min <= 0 or tau <= 0 or eps <= 0:
        raise ValueError("lambda_min, tau and eps must be positive")
    if tau < lambda_min:
        raise ValueError("tau must be at least lambda_min")
    kappa = tau / lambda_min
    if kappa == 1.0:
        return 0
    k = math.ceil(math.log(kappa / (tau * eps)) / math.log(kappa / (kappa - 1.0)))
    return max(k, 0)


def normalized_series_apply(g: WeightedGraph, w: int | None, k: int, center: bool = True) -> np.ndarray:
    """Approximate ``L^+ chi_w`` through the normalized Laplacian.

    Evaluates ``D^{-1/2} (1/3) sum_{i<=k} (I - N/3)^i D^{-1/2} (chi_w - 1/n)``.
    Starting from the centered basis vector keeps the iterate off the kernel
    of ``N``, where the series would diverge.  The limit differs from
    ``L^+ chi_w`` by a multiple of the all-ones vector, which ``center``
    removes; forwarding decisions are unaffected either way.

    With ``w=None`` all columns are computed at once.
    """
    if not 0 <= (0 if w is None else w) < g.n:
        raise GraphError(f"vertex {w} out of range")
    g.require_connected()
    op = normalized_operator(g)
    X0 = centered_basis(g.n) if w is None else centered_basis(g.n)[:, w]
    X0 = X0 * _bcast(op.send_scale, X0)
    total = accumulate_series(op, X0, k)
    Z = (total / 3.0) * _bcast(op.send_scale, total)
    if center:
        Z = Z - Z.mean(axis=0)
    return Z
