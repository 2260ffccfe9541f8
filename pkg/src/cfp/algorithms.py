"""Centralized and distributed subgradient/projection iterations.

Every public step function takes states at time ``t`` and returns the states
at the next step; none of them mutate their inputs. Agent states are stored
row-wise in an ``(n, dim)`` array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .config import NumericConfig, default_config
from .convex import ConvexInequality, ConvexSet, LinearBlock, WholeSpace, always_satisfied
from .errors import (
    DimensionMismatch,
    InvalidParams,
    NonFinite,
    ScheduleViolation,
    StepSizeViolation,
    WrongInequalityKind,
)
from .graph import Digraph, SwitchingSchedule, step_size_bound

ALGORITHMS = (
    "centralized_continuous",
    "centralized_discrete",
    "distributed_continuous",
    "distributed_discrete",
    "linear_cfp",
)
CONTINUOUS = {"centralized_continuous", "distributed_continuous", "linear_cfp"}


@dataclass(frozen=True)
class StepSchedule:
    """Step-size sequence alpha(t) or beta(t).

    ``kind`` is ``"constant"`` (``value``), ``"harmonic"``
    (``c0 / (c1 t + 1)``) or ``"custom"`` (``samples[floor(t)]``, holding the
    last sample past the end).
    """

    kind: str = "constant"
    value: float = 1.0
    c0: float = 1.0
    c1: float = 0.0
    samples: tuple = ()
    role: str = "alpha"

    def __post_init__(self):
        if self.kind not in ("constant", "harmonic", "custom"):
            raise InvalidParams(f"unknown schedule kind {self.kind!r}")
        if self.kind == "constant" and not self.value >= 0:
            raise InvalidParams("constant schedule must be nonnegative")
        if self.kind == "harmonic" and not (self.c0 >= 0 and self.c1 >= 0):
            raise InvalidParams("harmonic schedule needs c0, c1 >= 0")
        if self.kind == "custom":
            samples = tuple(float(v) for v in self.samples)
            if not samples or min(samples) < 0:
                raise InvalidParams("custom schedule needs nonnegative samples")
            object.__setattr__(self, "samples", samples)

    @classmethod
    def constant(cls, value, role="alpha"):
        return cls("constant", value=float(value), role=role)

    @classmethod
    def harmonic(cls, c0, c1, role="alpha"):
        return cls("harmonic", c0=float(c0), c1=float(c1), role=role)

    @classmethod
    def custom(cls, samples, role="alpha"):
        return cls("custom", samples=tuple(samples), role=role)

    def __call__(self, t: float) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "harmonic":
            return self.c0 / (self.c1 * t + 1.0)
        k = min(int(math.floor(t)), len(self.samples) - 1)
        return self.samples[max(k, 0)]

    @property
    def theorem_valid(self) -> bool:
        """Whether the family provably meets the discrete convergence conditions."""
        return validate_schedule(self, "discrete").valid is True


@dataclass(frozen=True)
class ScheduleReport:
    valid: bool | None
    in_unit_interval: bool | None
    sum_diverges: bool | None
    squares_summable: bool | None
    reason: str
    partial_sum: float | None = None
    partial_sum_squares: float | None = None


def validate_schedule(s: StepSchedule, theorem: str = "discrete", horizon: int = 5000) -> ScheduleReport:
    """Check a schedule against the conditions of a convergence theorem.

    ``theorem`` is ``"continuous"`` (nonnegative with divergent integral) or
    ``"discrete"`` (values in [0, 1] for alpha, divergent sum, summable
    squares). Custom schedules get partial sums over ``horizon`` and an
    ``"unknown"`` verdict (``valid is None``).
    """
    if theorem not in ("continuous", "discrete"):
        raise InvalidParams(f"unknown theorem {theorem!r}")
    unit_required = theorem == "discrete" and s.role == "alpha"
    if s.kind == "constant":
        in_unit = s.value <= 1.0
        diverges = s.value > 0
        squares = s.value == 0
        if theorem == "continuous":
            ok = diverges
            reason = "constant > 0 has divergent integral" if ok else "zero schedule never moves"
        else:
            ok = False
            reason = "constant schedule: sum of squares diverges" if diverges else "zero schedule: sum is 0"
        if unit_required and not in_unit:
            reason += "; value outside [0, 1]"
        return ScheduleReport(ok, in_unit, diverges, squares, reason)
    if s.kind == "harmonic":
        in_unit = s.c0 <= 1.0
        if s.c0 == 0:
            return ScheduleReport(False, True, False, True, "degenerate: c0 = 0 gives the zero schedule")
        if s.c1 == 0:
            # collapses to the constant c0
            return validate_schedule(StepSchedule.constant(s.c0, role=s.role), theorem)
        ok = True if theorem == "continuous" else (in_unit or not unit_required)
        reason = "harmonic: divergent sum, summable squares"
        if not ok:
            reason += "; c0 > 1 leaves [0, 1]"
        return ScheduleReport(ok, in_unit, True, True, reason)
    values = np.array([s(t) for t in range(horizon)])
    in_unit = bool(values.max() <= 1.0)
    return ScheduleReport(
        None if (in_unit or not unit_required) else False,
        in_unit, None, None,
        "custom schedule: asymptotics unknown, see partial sums",
        float(values.sum()), float((values**2).sum()),
    )


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Per-agent pairs ``(g_i, X_i)``; a point solves it if every ``g_i <= 0`` and it lies in every ``X_i``."""

    sets: tuple
    inequalities: tuple
    subgradient_bound: float | None = None

    def __post_init__(self):
        sets, ineqs = tuple(self.sets), tuple(self.inequalities)
        if len(sets) != len(ineqs) or not sets:
            raise InvalidParams("need one set and one inequality per agent")
        dim = sets[0].dim
        for i, (s, g) in enumerate(zip(sets, ineqs)):
            if not isinstance(s, ConvexSet) or not isinstance(g, ConvexInequality):
                raise InvalidParams(f"agent {i}: expected ConvexSet and ConvexInequality")
            if s.dim != dim or g.dim != dim:
                raise DimensionMismatch(f"agent {i}: dimension differs from {dim}")
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "inequalities", ineqs)

    @classmethod
    def from_agents(cls, dim, agents, subgradient_bound=None):
        """``agents`` holds ``(set or None, inequality or None)`` pairs."""
        sets, ineqs = [], []
        for s, g in agents:
            sets.append(s if s is not None else WholeSpace(dim))
            ineqs.append(g if g is not None else always_satisfied(dim))
        return cls(tuple(sets), tuple(ineqs), subgradient_bound)

    @property
    def n(self) -> int:
        return len(self.sets)

    @property
    def dim(self) -> int:
        return self.sets[0].dim

    def agent(self, i) -> "ProblemSpec":
        return ProblemSpec((self.sets[i],), (self.inequalities[i],), self.subgradient_bound)

    @cached_property
    def packed(self):
        return kernels.pack(self.sets, self.inequalities)

    @cached_property
    def packed_half(self):
        # linear-block flow uses A^T (Ax - b)^+ instead of grad psi
        return kernels.pack(self.sets, self.inequalities, block_scale=1.0)

    def is_linear(self) -> bool:
        return all(isinstance(g, LinearBlock) for g in self.inequalities)


@dataclass(frozen=True)
class SolverConfig:
    """Run parameters.

    ``horizon`` is in seconds for the continuous solvers and in iterations
    for the discrete ones. ``allow_unstable_h`` lifts the ``0 < h < rho``
    precondition of the discrete distributed solver.
    """

    tau: float = 1.0
    h: float = 0.1
    dt: float = 1e-3
    horizon: float = 10.0
    alpha: StepSchedule = field(default_factory=lambda: StepSchedule.constant(1.0, "alpha"))
    beta: StepSchedule = field(default_factory=lambda: StepSchedule.constant(1.0, "beta"))
    record_every: int = 10
    dwell: int = 100
    allow_unstable_h: bool = False
    tolerances: NumericConfig = field(default_factory=default_config)

    def __post_init__(self):
        if not self.tau >= 0:
            raise InvalidParams("tau must be nonnegative")
        if not self.dt > 0:
            raise InvalidParams("dt must be positive")
        if not self.horizon >= 0:
            raise InvalidParams("horizon must be nonnegative")
        if self.record_every < 1 or self.dwell < 1:
            raise InvalidParams("record_every and dwell must be >= 1")


def _as_states(states, n, dim):
    x = np.ascontiguousarray(states, dtype=float)
    if x.ndim == 1 and n == 1:
        x = x.reshape(1, -1)
    if x.shape != (n, dim):
        raise DimensionMismatch(f"states must have shape {(n, dim)}, got {x.shape}")
    return x


def check_finite(x, cfg: SolverConfig, step=None):
    """Raise :class:`NonFinite` on NaN/Inf or a state norm above the divergence bound."""
    if not np.all(np.isfinite(x)):
        raise NonFinite(f"non-finite state at step {step}", step)
    big = float(np.abs(x).max()) if x.size else 0.0
    if big > cfg.tolerances.divergence:
        raise NonFinite(f"state norm exceeded {cfg.tolerances.divergence:g} at step {step}", step)


def adjacency_at(topology, t: float) -> np.ndarray:
    if isinstance(topology, SwitchingSchedule):
        return topology.graph_at(t).weights
    return topology.weights


@lru_cache(maxsize=64)
def _rho_cached(key, n):
    return step_size_bound(Digraph(np.frombuffer(key).reshape(n, n)))


def checked_step_bound(graph: Digraph) -> float:
    return _rho_cached(graph.weights.tobytes(), graph.n)


def _check_alpha(a, t):
    if not 0.0 <= a <= 1.0:
        raise ScheduleViolation(f"alpha({t}) = {a} outside [0, 1]")


_NO_EDGES = np.zeros((1, 1))


def centralized_continuous_step(x, t: float, g: ConvexInequality, X: ConvexSet, cfg: SolverConfig):
    """Euler step of ``x' = -alpha(t) (x - P_X x) - beta(t) d``, ``d`` a subgradient of ``g^+``."""
    spec = ProblemSpec((X,), (g,))
    x2 = _as_states(x, 1, spec.dim)
    out = np.empty_like(x2)
    kernels.continuous_step(x2, _NO_EDGES, spec.packed, cfg.alpha(t), cfg.beta(t), cfg.dt, out)
    check_finite(out, cfg)
    return out[0]


def centralized_discrete_step(x, t: int, g: ConvexInequality, X: ConvexSet, cfg: SolverConfig):
    """``xi = x - beta d``; ``x+ = xi - alpha (xi - P_X xi)``."""
    a = cfg.alpha(t)
    _check_alpha(a, t)
    spec = ProblemSpec((X,), (g,))
    x2 = _as_states(x, 1, spec.dim)
    out, y, grad = np.empty_like(x2), np.empty_like(x2), np.empty_like(x2)
    kernels.discrete_step(x2, _NO_EDGES, 0.0, a, cfg.beta(t), spec.packed, out, y, grad)
    check_finite(out, cfg)
    return out[0]


def _check_topology(topology, n):
    if topology.n != n:
        raise DimensionMismatch(f"topology has {topology.n} agents, problem has {n}")


def distributed_continuous_step(states, t: float, topology, spec: ProblemSpec, cfg: SolverConfig):
    """Synchronous Euler step of consensus plus ``-tau ([x_i - P_i x_i] + d_i)``."""
    _check_topology(topology, spec.n)
    x = _as_states(states, spec.n, spec.dim)
    out = np.empty_like(x)
    adj = np.ascontiguousarray(adjacency_at(topology, t))
    kernels.continuous_step(x, adj, spec.packed, cfg.tau, cfg.tau, cfg.dt, out)
    check_finite(out, cfg)
    return out


def distributed_discrete_detail(states, t: int, graph: Digraph, spec: ProblemSpec, cfg: SolverConfig):
    """As :func:`distributed_discrete_step`, also returning the consensus points ``y`` and scaled subgradients."""
    if isinstance(graph, SwitchingSchedule):
        raise InvalidParams("the discrete distributed solver runs on a fixed graph")
    _check_topology(graph, spec.n)
    if not cfg.allow_unstable_h:
        rho = checked_step_bound(graph)
        if not 0 < cfg.h < rho:
            raise StepSizeViolation(f"h = {cfg.h} outside (0, {rho:.6g})")
    a = cfg.alpha(t)
    _check_alpha(a, t)
    x = _as_states(states, spec.n, spec.dim)
    out, y, grad = np.empty_like(x), np.empty_like(x), np.empty_like(x)
    kernels.discrete_step(x, np.ascontiguousarray(graph.weights), cfg.h, a, cfg.beta(t),
                          spec.packed, out, y, grad)
    check_finite(out, cfg)
    return out, y, grad


def distributed_discrete_step(states, t: int, graph: Digraph, spec: ProblemSpec, cfg: SolverConfig):
    """Consensus move to ``y_i``, subgradient step at ``y_i``, then relaxed projection."""
    return distributed_discrete_detail(states, t, graph, spec, cfg)[0]


def linear_cfp_step(states, t: float, graph, spec: ProblemSpec, cfg: SolverConfig):
    """Euler step of consensus plus ``-tau (A_i^T (A_i x_i - b_i)^+ + x_i - P_i x_i)``.

    The penalty direction is half the gradient of ``||(A x - b)^+||^2``; the
    factor 2 is absorbed into ``tau``.
    """
    if not spec.is_linear():
        raise WrongInequalityKind("linear_cfp_step needs LinearBlock inequalities for every agent")
    _check_topology(graph, spec.n)
    x = _as_states(states, spec.n, spec.dim)
    out = np.empty_like(x)
    adj = np.ascontiguousarray(adjacency_at(graph, t))
    kernels.continuous_step(x, adj, spec.packed_half, cfg.tau, cfg.tau, cfg.dt, out)
    check_finite(out, cfg)
    return out


def drift(states, t, topology, spec: ProblemSpec, cfg: SolverConfig, algorithm="distributed_continuous"):
    """Right-hand side of a continuous solver at the given states."""
    x = _as_states(states, spec.n, spec.dim)
    if algorithm == "centralized_continuous":
        nxt = centralized_continuous_step(x[0], t, spec.inequalities[0], spec.sets[0], cfg).reshape(1, -1)
    elif algorithm == "linear_cfp":
        nxt = linear_cfp_step(x, t, topology, spec, cfg)
    else:
        nxt = distributed_continuous_step(x, t, topology, spec, cfg)
    return (nxt - x) / cfg.dt


def as_states(states: Sequence, n: int, dim: int) -> np.ndarray:
    return _as_states(states, n, dim).copy()
