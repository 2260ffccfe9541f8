"""Scenario orchestration: run a solver, record metrics, check Lyapunov inequalities."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import kernels
from .algorithms import (
    ALGORITHMS,
    CONTINUOUS,
    ProblemSpec,
    SolverConfig,
    as_states,
    check_finite,
    checked_step_bound,
)
from .errors import (
    AssertionFailure,
    DimensionMismatch,
    InvalidParams,
    NonFinite,
    ScheduleViolation,
    StepSizeViolation,
    WrongInequalityKind,
)
from .graph import SwitchingSchedule, is_balanced, is_strongly_connected, left_null_eigenvector

CHECKS = ("lyapunov",)


@dataclass(frozen=True, eq=False)
class Scenario:
    problem: ProblemSpec
    topology: object
    algorithm: str
    config: SolverConfig
    initial_states: np.ndarray
    assertions: tuple = ()
    assertion_mode: str = "raise"
    reference_point: np.ndarray | None = None
    expected: dict = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidParams(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        p = self.problem
        object.__setattr__(self, "initial_states", as_states(self.initial_states, p.n, p.dim))
        if self.topology is not None and self.topology.n != p.n:
            raise DimensionMismatch(f"topology has {self.topology.n} agents, problem has {p.n}")
        if self.topology is None and p.n != 1:
            raise InvalidParams("a topology is required for more than one agent")
        if self.algorithm.startswith("centralized") and p.n != 1:
            raise InvalidParams("centralized algorithms take a single (g, X) pair")
        if self.algorithm == "distributed_discrete" and isinstance(self.topology, SwitchingSchedule):
            raise InvalidParams("the discrete distributed solver runs on a fixed graph")
        if self.algorithm == "linear_cfp" and not p.is_linear():
            raise WrongInequalityKind("linear_cfp needs linear_block inequalities for every agent")
        unknown = set(self.assertions) - set(CHECKS)
        if unknown:
            raise InvalidParams(f"unknown assertions {sorted(unknown)}")
        if self.assertion_mode not in ("raise", "record"):
            raise InvalidParams("assertion_mode must be 'raise' or 'record'")
        if self.reference_point is not None:
            ref = np.array(self.reference_point, dtype=float).reshape(-1)
            if ref.shape != (p.dim,):
                raise DimensionMismatch("reference_point has the wrong dimension")
            object.__setattr__(self, "reference_point", ref)
        object.__setattr__(self, "assertions", tuple(self.assertions))

    @property
    def continuous(self) -> bool:
        return self.algorithm in CONTINUOUS


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    metrics: dict

    def __len__(self):
        return len(self.times)

    def to_csv(self, path=None) -> str:
        """Write one row per (time, agent); returns the CSV text."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        m = self.states.shape[2] if self.states.ndim == 3 else 0
        w.writerow(["t", "agent"] + [f"x{k}" for k in range(m)]
                   + ["consensus_error", "max_set_residual", "max_inequality_residual", "lyapunov"])
        for r, t in enumerate(self.times):
            tail = [repr(float(self.metrics[k][r])) for k in METRIC_KEYS]
            for i, x in enumerate(self.states[r]):
                w.writerow([repr(float(t)), i] + [repr(float(v)) for v in x] + tail)
        text = buf.getvalue()
        if path is not None:
            atomic_write(path, text)
        return text


METRIC_KEYS = ("consensus_error", "max_set_residual", "max_inequality_residual", "lyapunov")


@dataclass
class RunReport:
    converged: bool
    status: str
    final_point: np.ndarray
    final_metrics: dict
    steps: int
    final_time: float
    wall_time: float
    violations: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "status": self.status,
            "final_point": [float(v) for v in self.final_point],
            "final_metrics": {k: _json_float(v) for k, v in self.final_metrics.items()},
            "steps": self.steps,
            "final_time": self.final_time,
            "wall_time": self.wall_time,
            "violations": self.violations,
            "diagnostics": {k: _json_float(v) if isinstance(v, float) else v
                            for k, v in self.diagnostics.items()},
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2) + "\n"
        if path is not None:
            atomic_write(path, text)
        return text


def _json_float(v):
    v = float(v)
    return v if math.isfinite(v) else None


def atomic_write(path, text: str):
    """Write via a temporary file in the same directory, then rename."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".cfp-", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def consensus_error(states) -> float:
    """Largest pairwise Euclidean distance between agent states."""
    x = np.atleast_2d(np.asarray(states, dtype=float))
    if x.shape[0] < 1:
        raise InvalidParams("need at least one agent")
    diff = x[:, None, :] - x[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=2)).max())


def feasibility_residuals(spec: ProblemSpec, x) -> dict:
    """Largest distance to any ``X_i`` and largest ``g_i^+`` at the point ``x``."""
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise DimensionMismatch(f"point must have length {spec.dim}")
    return {
        "max_set_residual": max(s.distance(x) for s in spec.sets),
        "max_inequality_residual": max(g.plus_value(x) for g in spec.inequalities),
    }


def _time_blocks(horizon: float, dt: float, topology) -> Iterator[tuple]:
    """Yield ``(t0, step, count, adjacency)`` runs of equal steps.

    Steps never straddle a switch or the horizon.
    """
    def pieces(start, length):
        q = length / dt
        if abs(q - round(q)) < 1e-9 * max(1.0, q):
            count = max(int(round(q)), 1)
            yield start, length / count, count
            return
        count = int(math.ceil(q))
        if count > 1:
            yield start, dt, count - 1
        yield start + dt * (count - 1), length - dt * (count - 1), 1

    if isinstance(topology, SwitchingSchedule):
        period = topology.period
        starts = topology.starts()
        adj = [np.ascontiguousarray(topology.graphs[k].weights) for k, _ in topology.segments]
        cycle = 0
        while True:
            for k, (_, d) in enumerate(topology.segments):
                t0 = cycle * period + starts[k]
                if t0 >= horizon - 1e-12 * max(1.0, horizon):
                    return
                for t, s, c in pieces(t0, min(d, horizon - t0)):
                    yield t, s, c, adj[k]
            cycle += 1
    else:
        adj = np.ascontiguousarray(topology.weights) if topology is not None else np.zeros((1, 1))
        if horizon > 0:
            for t, s, c in pieces(0.0, horizon):
                yield t, s, c, adj


def _time_grid(horizon: float, dt: float, topology) -> Iterator[tuple]:
    """Yield ``(t, step, adjacency)`` for every Euler step."""
    for t0, s, c, adj in _time_blocks(horizon, dt, topology):
        for j in range(c):
            yield t0 + j * s, s, adj


class _Lyapunov:
    """Weighted distance to a reference solution and its per-step bound."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.ref = sc.reference_point
        self.w = self._weights(sc)
        self.scale = 0.5 if sc.continuous else 1.0
        self.enabled = self.ref is not None and self.w is not None

    @staticmethod
    def _weights(sc):
        topo = sc.topology
        if topo is None:
            return np.ones(1)
        if isinstance(topo, SwitchingSchedule):
            if all(is_balanced(g) for g in topo.graphs):
                return np.full(topo.n, 1.0 / topo.n)
            return None
        if is_strongly_connected(topo):
            return left_null_eigenvector(topo, sc.config.tolerances)
        return None

    def value(self, x) -> float:
        if not self.enabled:
            return float("nan")
        return self.scale * float(self.w @ ((x - self.ref) ** 2).sum(axis=1))

    def continuous_bound(self, x, x_new, step, t):
        """Return ``(dV, bound, excess)`` for one Euler step of a continuous solver."""
        sc, cfg = self.sc, self.sc.config
        spec = sc.problem
        if sc.algorithm == "centralized_continuous":
            set_gain, ineq_gain = cfg.alpha(t), cfg.beta(t)
        else:
            set_gain = ineq_gain = cfg.tau
        ineq_factor = 0.5 if sc.algorithm == "linear_cfp" else 1.0
        dist2 = np.array([s.distance(xi) ** 2 for s, xi in zip(spec.sets, x)])
        gplus = np.array([g.plus_value(xi) for g, xi in zip(spec.inequalities, x)])
        rhs = -set_gain * float(self.w @ dist2) - ineq_gain * ineq_factor * float(self.w @ gplus)
        f = (x_new - x) / step
        dv = self.value(x_new) - self.value(x)
        bound = step * rhs + 0.5 * step * step * float(self.w @ (f**2).sum(axis=1))
        return dv, bound, (dv - step * rhs) / step

    def discrete_bound(self, x, x_new, y, grad, beta):
        spec = self.sc.problem
        dv = self.value(x_new) - self.value(x)
        gnorm2 = (grad**2).sum(axis=1)
        if self.sc.algorithm == "centralized_discrete":
            return dv, float(gnorm2[0])
        gplus = np.array([g.plus_value(yi) for g, yi in zip(spec.inequalities, y)])
        return dv, -beta * float(self.w @ gplus) + float(self.w @ gnorm2)


def _record_metrics(spec, x, lyap):
    mean = x.mean(axis=0)
    res = feasibility_residuals(spec, mean)
    return {
        "consensus_error": consensus_error(x),
        "max_set_residual": res["max_set_residual"],
        "max_inequality_residual": res["max_inequality_residual"],
        "lyapunov": lyap.value(x),
    }


def correction_norm(sc: Scenario, x) -> float:
    """Largest ``||phi_i||``, the non-consensus part of the continuous input."""
    spec = sc.problem
    pk = spec.packed_half if sc.algorithm == "linear_cfp" else spec.packed
    out = np.empty_like(x)
    gain = sc.config.tau if sc.algorithm != "centralized_continuous" else 1.0
    kernels.continuous_step(x, np.zeros((x.shape[0], x.shape[0])), pk, gain, gain, 1.0, out)
    return float(np.sqrt(((out - x) ** 2).sum(axis=1)).max())


def run(scenario: Scenario) -> tuple[Trajectory, RunReport]:
    """Run to the horizon or until converged for ``dwell`` consecutive records.

    Divergence (non-finite state or norm above the configured bound) ends the
    run with ``status == "diverged"`` instead of raising.
    """
    sc, cfg = scenario, scenario.config
    spec = sc.problem
    tol = cfg.tolerances
    lyap = _Lyapunov(sc)
    checking = "lyapunov" in sc.assertions and lyap.enabled
    violations = []
    diagnostics = {"backend": kernels.BACKEND, "algorithm": sc.algorithm}
    if "lyapunov" in sc.assertions and not lyap.enabled:
        diagnostics["lyapunov_check"] = "skipped: needs reference_point and a strongly connected or balanced topology"

    x = sc.initial_states.copy()
    times, states, rows = [], [], []
    good_streak = 0
    converged = False
    status = "horizon"
    steps = 0
    t_now = 0.0
    max_excess = -math.inf
    start = time.perf_counter()

    def record(t):
        nonlocal good_streak, converged
        m = _record_metrics(spec, x, lyap)
        times.append(t)
        states.append(x.copy())
        rows.append(m)
        ok = max(m["consensus_error"], m["max_set_residual"], m["max_inequality_residual"]) <= tol.convergence
        good_streak = good_streak + 1 if ok else 0
        if good_streak >= cfg.dwell:
            converged = True

    def violated(name, step, lhs, rhs):
        if sc.assertion_mode == "raise":
            raise AssertionFailure(name, step, lhs, rhs)
        violations.append({"check": name, "step": step, "lhs": lhs, "rhs": rhs})

    out = np.empty_like(x)
    try:
        if sc.continuous:
            pk = spec.packed_half if sc.algorithm == "linear_cfp" else spec.packed
            last_t = None
            varying = sc.algorithm == "centralized_continuous" and not (
                cfg.alpha.kind == "constant" and cfg.beta.kind == "constant")
            if checking or varying:
                for t, step, adj in _time_grid(cfg.horizon, cfg.dt, sc.topology):
                    if steps % cfg.record_every == 0:
                        record(t)
                        if converged:
                            break
                    if sc.algorithm == "centralized_continuous":
                        sg, ig = cfg.alpha(t), cfg.beta(t)
                    else:
                        sg = ig = cfg.tau
                    kernels.continuous_step(x, adj, pk, sg, ig, step, out)
                    check_finite(out, cfg, steps)
                    if checking:
                        dv, bound, excess = lyap.continuous_bound(x, out, step, t)
                        max_excess = max(max_excess, excess)
                        if dv > bound + tol.lyapunov:
                            violated("lyapunov", steps, dv, bound)
                    x, out = out, x
                    steps += 1
                    last_t = t + step
            else:
                if sc.algorithm == "centralized_continuous":
                    sg, ig = cfg.alpha(0.0), cfg.beta(0.0)
                else:
                    sg = ig = cfg.tau
                for t0, step, count, adj in _time_blocks(cfg.horizon, cfg.dt, sc.topology):
                    j = 0
                    while j < count:
                        if steps % cfg.record_every == 0:
                            record(t0 + j * step)
                            if converged:
                                break
                        chunk = min(count - j, cfg.record_every - steps % cfg.record_every)
                        done = kernels.continuous_steps(x, adj, pk, sg, ig, step, chunk,
                                                        tol.divergence)
                        steps += done
                        j += done
                        if done < chunk:
                            raise NonFinite(f"state diverged at step {steps}", steps)
                        last_t = t0 + j * step
                    if converged:
                        break
            if last_t is not None and not converged:
                t_now = last_t
                record(t_now)
            elif converged:
                t_now = times[-1]
        else:
            horizon = int(cfg.horizon)
            graph = sc.topology
            adj = np.ascontiguousarray(graph.weights) if graph is not None else np.zeros((1, 1))
            h = cfg.h if graph is not None else 0.0
            if graph is not None and not cfg.allow_unstable_h:
                rho = checked_step_bound(graph)
                if not 0 < h < rho:
                    raise StepSizeViolation(f"h = {h} outside (0, {rho:.6g})")
            y, grad = np.empty_like(x), np.empty_like(x)
            k = 0
            while k < horizon:
                if k % cfg.record_every == 0:
                    record(float(k))
                    if converged:
                        break
                chunk = 1 if checking else min(horizon - k, cfg.record_every - k % cfg.record_every)
                alphas = np.array([cfg.alpha(k + j) for j in range(chunk)], dtype=float)
                betas = np.array([cfg.beta(k + j) for j in range(chunk)], dtype=float)
                bad = np.flatnonzero((alphas < 0.0) | (alphas > 1.0))
                if bad.size:
                    j = int(bad[0])
                    raise ScheduleViolation(f"alpha({k + j}) = {alphas[j]} outside [0, 1]")
                if checking:
                    kernels.discrete_step(x, adj, h, alphas[0], betas[0], spec.packed, out, y, grad)
                    check_finite(out, cfg, k)
                    dv, bound = lyap.discrete_bound(x, out, y, grad, betas[0])
                    if dv > bound + tol.lyapunov:
                        violated("lyapunov", k, dv, bound)
                    x, out = out, x
                    done = 1
                else:
                    done = kernels.discrete_steps(x, adj, h, alphas, betas, spec.packed, tol.divergence)
                steps += done
                k += done
                if done < chunk:
                    raise NonFinite(f"state diverged at step {k}", k)
            if horizon > 0 and not converged:
                record(float(steps))
            t_now = times[-1] if times else 0.0
    except NonFinite as exc:
        status = "diverged"
        diagnostics["abort"] = str(exc)
        t_now = float(steps) if not sc.continuous else (times[-1] if times else 0.0)

    if converged:
        status = "converged"
    wall = time.perf_counter() - start

    metric_arrays = {k: np.array([r[k] for r in rows], dtype=float) for k in METRIC_KEYS}
    m = x.shape[1]
    traj = Trajectory(np.array(times, dtype=float),
                      np.array(states, dtype=float).reshape(len(times), spec.n, m), metric_arrays)
    if np.all(np.isfinite(x)):
        final_metrics = _record_metrics(spec, x, lyap)
        if sc.continuous:
            diagnostics["final_correction_norm"] = correction_norm(sc, x)
    else:
        final_metrics = {k: float("nan") for k in METRIC_KEYS}
    if checking and sc.continuous:
        diagnostics["max_lyapunov_excess"] = max_excess
    report = RunReport(
        converged=converged,
        status=status,
        final_point=x.mean(axis=0),
        final_metrics=final_metrics,
        steps=steps,
        final_time=float(t_now),
        wall_time=wall,
        violations=violations,
        diagnostics=diagnostics,
    )
    return traj, report
