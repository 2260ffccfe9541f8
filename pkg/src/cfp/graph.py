"""Weighted digraphs, Laplacians and the connectivity conditions of the solvers.

Edge convention: ``weights[i, j] > 0`` means agent ``i`` receives from agent
``j``; information flows ``j -> i``. Diagonal entries are ignored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .config import NumericConfig, default_config
from .errors import (
    InvalidParams,
    NotConnected,
    NotStronglyConnected,
    NumericalFailure,
)


@dataclass(frozen=True, eq=False)
class Digraph:
    """Communication topology given by a nonnegative adjacency matrix."""

    weights: np.ndarray

    def __post_init__(self):
        a = np.array(self.weights, dtype=float, copy=True)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
            raise InvalidParams(f"weights must be a nonempty square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidParams("weights must be finite")
        if np.any(a < 0):
            raise InvalidParams("weights must be nonnegative")
        np.fill_diagonal(a, 0.0)
        a.setflags(write=False)
        object.__setattr__(self, "weights", a)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[float]]) -> "Digraph":
        """Build from ``(source, target[, weight])`` triples (0-based labels)."""
        a = np.zeros((n, n))
        for edge in edges:
            src, dst = int(edge[0]), int(edge[1])
            w = float(edge[2]) if len(edge) > 2 else 1.0
            if not (0 <= src < n and 0 <= dst < n):
                raise InvalidParams(f"edge {src}->{dst} out of range for n={n}")
            a[dst, src] = w
        return cls(a)

    @classmethod
    def undirected(cls, n: int, pairs: Iterable[Sequence[float]]) -> "Digraph":
        """Bidirectional graph with ``a_ij = a_ji`` for every listed pair."""
        edges = []
        for p in pairs:
            w = float(p[2]) if len(p) > 2 else 1.0
            edges.append((p[0], p[1], w))
            edges.append((p[1], p[0], w))
        return cls.from_edges(n, edges)

    def edges(self) -> list[tuple[int, int, float]]:
        """Edges as ``(source, target, weight)`` with positive weight."""
        dst, src = np.nonzero(self.weights > 0)
        return [(int(j), int(i), float(self.weights[i, j])) for i, j in zip(dst, src)]

    def support(self) -> "Digraph":
        return Digraph((self.weights > 0).astype(float))

    def scaled(self, c: float) -> "Digraph":
        return Digraph(c * self.weights)

    def __eq__(self, other):
        return isinstance(other, Digraph) and np.array_equal(self.weights, other.weights)

    __hash__ = None


@dataclass(frozen=True)
class SwitchingSchedule:
    """Periodic piecewise-constant topology.

    ``segments`` is a sequence of ``(graph_index, duration)``; the pattern
    repeats forever with period ``sum(durations)``.
    """

    graphs: tuple
    segments: tuple

    def __post_init__(self):
        graphs = tuple(self.graphs)
        segments = tuple((int(k), float(d)) for k, d in self.segments)
        if not graphs:
            raise InvalidParams("schedule needs at least one graph")
        n = graphs[0].n
        if any(g.n != n for g in graphs):
            raise InvalidParams("all graphs in a schedule must have the same size")
        if not segments:
            raise InvalidParams("schedule needs at least one segment")
        for k, d in segments:
            if not 0 <= k < len(graphs):
                raise InvalidParams(f"segment graph index {k} out of range")
            if not (d > 0 and math.isfinite(d)):
                raise InvalidParams(f"segment duration must be positive, got {d}")
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "segments", segments)

    @property
    def n(self) -> int:
        return self.graphs[0].n

    @property
    def period(self) -> float:
        return sum(d for _, d in self.segments)

    def starts(self) -> np.ndarray:
        """Segment start offsets within one period."""
        return np.concatenate([[0.0], np.cumsum([d for _, d in self.segments])[:-1]])

    def segment_at(self, t: float) -> int:
        """Index into ``segments`` active at time ``t`` (right-continuous)."""
        tau = math.fmod(t, self.period)
        if tau < 0:
            tau += self.period
        idx = int(np.searchsorted(self.starts(), tau, side="right")) - 1
        return max(idx, 0)

    def graph_at(self, t: float) -> Digraph:
        return self.graphs[self.segments[self.segment_at(t)][0]]


@dataclass(frozen=True)
class DeltaGraphParams:
    T: float
    delta: float

    def __post_init__(self):
        if not (self.T > 0 and self.delta > 0):
            raise InvalidParams("delta-graph window T and threshold delta must be positive")


def laplacian(g: Digraph) -> np.ndarray:
    a = g.weights
    lap = -a.copy()
    lap[np.diag_indices_from(lap)] = a.sum(axis=1)
    return lap


def _reachable(adj: np.ndarray, root: int) -> np.ndarray:
    """Nodes reachable from ``root`` following ``adj[src] -> dst`` lists."""
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[root] = True
    stack = [root]
    while stack:
        u = stack.pop()
        for v in np.flatnonzero(adj[u]):
            if not seen[v]:
                seen[v] = True
                stack.append(v)
    return seen


def _flow(g: Digraph) -> np.ndarray:
    # flow[j, i] is True when information moves j -> i
    return (g.weights > 0).T


def is_strongly_connected(g: Digraph) -> bool:
    flow = _flow(g)
    return bool(_reachable(flow, 0).all() and _reachable(flow.T, 0).all())


def spanning_tree_roots(g: Digraph) -> list[int]:
    """Every node from which all nodes are reachable along information flow."""
    flow = _flow(g)
    return [r for r in range(g.n) if _reachable(flow, r).all()]


def has_spanning_tree(g: Digraph) -> bool:
    flow = _flow(g)
    return any(_reachable(flow, r).all() for r in range(g.n))


def is_balanced(g: Digraph, tol: float | None = None) -> bool:
    tol = default_config().balance if tol is None else tol
    a = g.weights
    return bool(np.all(np.abs(a.sum(axis=1) - a.sum(axis=0)) <= tol))


def laplacian_spectrum(g: Digraph) -> np.ndarray:
    """Eigenvalues of the Laplacian as complex numbers, ascending real part."""
    try:
        lam = np.linalg.eigvals(laplacian(g))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigenvalue iteration failed: {exc}") from exc
    lam = lam.astype(complex)
    order = np.lexsort((lam.imag, np.round(lam.real, 12)))
    return lam[order]


def left_null_eigenvector(g: Digraph, cfg: NumericConfig | None = None) -> np.ndarray:
    """Positive ``w`` with ``w @ L = 0`` and ``sum(w) = 1``."""
    cfg = cfg or default_config()
    if not is_strongly_connected(g):
        raise NotStronglyConnected("left null eigenvector needs a strongly connected graph")
    lap = laplacian(g)
    scale = max(1.0, float(np.abs(lap).max()))
    try:
        lam, vecs = np.linalg.eig(lap.T)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigen-solve failed: {exc}") from exc
    v = np.real(vecs[:, np.argmin(np.abs(lam))])
    w = v / v.sum()
    if np.abs(w @ lap).max() > cfg.null_residual * scale or w.min() <= 0:
        # bordered solve: L^T w = 0 with one equation replaced by sum(w) = 1
        system = lap.T.copy()
        system[-1, :] = 1.0
        rhs = np.zeros(g.n)
        rhs[-1] = 1.0
        try:
            w = np.linalg.solve(system, rhs)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"null-space solve failed: {exc}") from exc
    if w.min() <= 0 or np.abs(w @ lap).max() > cfg.null_residual * scale:
        raise NumericalFailure("left null eigenvector not positive or not accurate")
    return w


def nonzero_eigenvalues(g: Digraph) -> np.ndarray:
    lam = laplacian_spectrum(g)
    return np.delete(lam, np.argmin(np.abs(lam)))


def step_size_bound(g: Digraph) -> float:
    """Largest admissible consensus gain for the discrete distributed solver."""
    if not has_spanning_tree(g):
        raise NotConnected("step size bound needs a graph with a spanning tree")
    lam = nonzero_eigenvalues(g)
    degree_term = 1.0 / g.weights.sum(axis=1).max()
    if lam.size == 0:
        return degree_term
    spectral_term = float(np.min(2.0 * lam.real / np.abs(lam) ** 2))
    return float(min(degree_term, spectral_term))


def delta_graph(s: SwitchingSchedule, p: DeltaGraphParams) -> Digraph:
    """0/1 graph of edges whose weight integral over every window of length T is >= delta.

    The sliding integral is piecewise linear in the window start, so its
    minimum sits at a point where either window end crosses a switch.
    """
    period = s.period
    starts = s.starts()
    mats = np.stack([s.graphs[k].weights for k, _ in s.segments])
    durs = np.array([d for _, d in s.segments])
    cum = np.concatenate([np.zeros((1,) + mats.shape[1:]), np.cumsum(mats * durs[:, None, None], axis=0)])

    def primitive(t):
        q, r = divmod(t, period)
        k = min(int(np.searchsorted(starts, r, side="right")) - 1, len(durs) - 1)
        return q * cum[-1] + cum[k] + (r - starts[k]) * mats[k]

    candidates = np.unique(np.concatenate([starts, np.mod(starts - p.T, period)]))
    worst = None
    for t in candidates:
        integral = primitive(t + p.T) - primitive(t)
        worst = integral if worst is None else np.minimum(worst, integral)
    # rounding slack so that an integral exactly equal to delta counts as one
    present = worst >= p.delta - 1e-12 * max(1.0, p.delta)
    np.fill_diagonal(present, False)
    return Digraph(present.astype(float))


def log_contraction_rate(n: int, delta: float, T: float) -> float:
    """Natural log of :func:`contraction_rate`, exact where the rate rounds to 1."""
    if n < 2:
        raise InvalidParams("contraction rate needs n >= 2")
    if not (delta > 0 and T > 0):
        raise InvalidParams("delta and T must be positive")
    half = n // 2
    base_log = math.log1p(-math.exp(-half * math.log(8.0 * n * n)))
    return base_log / ((math.floor(1.0 / delta) + 1) * half * T)


def contraction_rate(n: int, delta: float, T: float) -> float:
    """Per-unit-time consensus contraction factor for balanced switching graphs."""
    return math.exp(log_contraction_rate(n, delta, T))
