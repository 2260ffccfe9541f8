"""Reference implementations used as test oracles.

Each one is written from first principles and shares no code with ``cfp``.
"""

from __future__ import annotations

import cmath
import itertools
from fractions import Fraction

import numpy as np


def circulant_cycle_eigenvalues(n: int) -> np.ndarray:
    """Spectrum of the unit directed n-cycle Laplacian: 1 - exp(2 pi i k / n)."""
    return np.array([1 - cmath.exp(2j * cmath.pi * k / n) for k in range(n)])


def exact_left_null_vector(weights) -> list[Fraction]:
    """Solve w^T L = 0, sum(w) = 1 in exact rational arithmetic.

    ``weights`` must hold integers or Fractions. Builds the system
    L^T w = 0 with the last equation replaced by the normalization row and
    runs Gauss-Jordan elimination with exact pivots.
    """
    n = len(weights)
    a = [[Fraction(weights[i][j]) if i != j else Fraction(0) for j in range(n)] for i in range(n)]
    lap = [[-a[i][j] for j in range(n)] for i in range(n)]
    for i in range(n):
        lap[i][i] = sum(a[i])
    rows = [[lap[i][j] for i in range(n)] + [Fraction(0)] for j in range(n)]  # L^T
    rows[-1] = [Fraction(1)] * n + [Fraction(1)]
    for col in range(n):
        piv = next(r for r in range(col, n) if rows[r][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        p = rows[col][col]
        rows[col] = [v / p for v in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [u - f * v for u, v in zip(rows[r], rows[col])]
    return [rows[i][n] for i in range(n)]


def reaches_all(weights, root) -> bool:
    """Depth-first reachability along information flow j -> i (a_ij > 0)."""
    n = len(weights)
    seen, stack = {root}, [root]
    while stack:
        j = stack.pop()
        for i in range(n):
            if i != j and weights[i][j] > 0 and i not in seen:
                seen.add(i)
                stack.append(i)
    return len(seen) == n


def window_integral_min(segments, weights_per_graph, i, j, T, pitch=1e-3, sub=200):
    """Sampled minimum over start times of the integral of a_ij over [t, t+T].

    ``segments`` is a list of (graph index, duration); integration is a
    midpoint rule with ``sub`` points per unit ``pitch`` window slice.
    """
    period = sum(d for _, d in segments)

    def a_at(t):
        t = t % period
        acc = 0.0
        for k, d in segments:
            if t < acc + d:
                return weights_per_graph[k][i][j]
            acc += d
        return weights_per_graph[segments[-1][0]][i][j]

    best = np.inf
    m = int(round(T / pitch)) * 4
    for t0 in np.arange(0.0, period, pitch):
        s = (np.arange(m) + 0.5) * (T / m) + t0
        val = sum(a_at(v) for v in s) * (T / m)
        best = min(best, val)
    return best


def grid_project(contains, x, lo, hi, coarse=0.05, fine=1e-3, pad=0.15):
    """Two-level grid search for the nearest member of a convex set in 2-D.

    ``contains(y)`` is the set's defining predicate evaluated on an
    ``(k, 2)`` array. The coarse level scans ``[lo, hi]``; the fine level
    scans a ``pad``-neighbourhood of the coarse winner at pitch ``fine``.
    """
    x = np.asarray(x, dtype=float)

    def scan(a, b, step):
        gx = np.arange(a[0], b[0] + step / 2, step)
        gy = np.arange(a[1], b[1] + step / 2, step)
        pts = np.array(list(itertools.product(gx, gy)))
        ok = contains(pts)
        pts = pts[ok]
        d = ((pts - x) ** 2).sum(axis=1)
        return pts[np.argmin(d)]

    c = scan(np.asarray(lo, float), np.asarray(hi, float), coarse)
    return scan(c - pad, c + pad, fine)


def grid_project_line(a, b, x, span=20.0, fine=1e-3):
    """Nearest point on {y : a.y = b} in 2-D by scanning the line's parameter."""
    a = np.asarray(a, float)
    x = np.asarray(x, float)
    p0 = a * b / (a @ a)
    u = np.array([-a[1], a[0]]) / np.hypot(*a)
    s = np.arange(-span, span, fine)
    pts = p0 + s[:, None] * u
    return pts[np.argmin(((pts - x) ** 2).sum(axis=1))]


def grid_project_circle(center, radius, x, fine=1e-3):
    """Nearest point of a disc: ``x`` if inside, else a boundary scan at arc pitch ``fine``."""
    x = np.asarray(x, float)
    center = np.asarray(center, float)
    if ((x - center) ** 2).sum() <= radius * radius:
        return x
    th = np.arange(0.0, 2 * np.pi, fine / radius)
    pts = center + radius * np.stack([np.cos(th), np.sin(th)], axis=1)
    return pts[np.argmin(((pts - x) ** 2).sum(axis=1))]


def grid_project_halfplane(a, b, x, span=20.0, fine=1e-3):
    """Nearest point of {y : a.y <= b}: ``x`` if inside, else a boundary-line scan."""
    x = np.asarray(x, float)
    if np.asarray(a, float) @ x <= b:
        return x
    return grid_project_line(a, b, x, span, fine)


def central_difference(f, x, step=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = step
        g[k] = (f(x + e) - f(x - e)) / (2 * step)
    return g


def psi_reference(A, b, x) -> float:
    r = np.maximum(np.asarray(A) @ x - b, 0.0)
    return float(r @ r)


def reference_discrete_iteration(x, weights, h, alpha, beta, projections, subgradients):
    """Direct transcription of the consensus / subgradient / relaxed-projection update.

    ``projections[i]`` and ``subgradients[i]`` are plain callables for agent i.
    Returns ``(x_next, y, scaled_subgradients)``.
    """
    x = np.asarray(x, float)
    n = len(x)
    y = np.array([x[i] + h * sum(weights[i][j] * (x[j] - x[i]) for j in range(n) if j != i)
                  for i in range(n)])
    grads = np.array([beta * subgradients[i](y[i]) for i in range(n)])
    xi = y - grads
    nxt = np.array([xi[i] - alpha * (xi[i] - projections[i](xi[i])) for i in range(n)])
    return nxt, y, grads


def reference_continuous_drift(x, weights, gain, projections, directions):
    """Consensus term plus ``-gain * ((x_i - P_i x_i) + d_i)`` for every agent."""
    x = np.asarray(x, float)
    n = len(x)
    return np.array([
        sum(weights[i][j] * (x[j] - x[i]) for j in range(n) if j != i)
        - gain * ((x[i] - projections[i](x[i])) + directions[i](x[i]))
        for i in range(n)
    ])
