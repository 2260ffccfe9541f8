"""Pure-Python step kernels.

Same signatures as the compiled ``_ckernels`` module. Results are written
into the caller-provided ``out`` arrays.
"""

import numpy as np

from .convex import LinearBlock


def _direction(g, x, block_scale):
    if isinstance(g, LinearBlock) and block_scale != 2.0:
        return (block_scale / 2.0) * g.subgradient_plus(x)
    return g.subgradient_plus(x)


def consensus_term(x, adj, out):
    np.subtract(adj @ x, adj.sum(axis=1)[:, None] * x, out=out)


def continuous_step(x, adj, pk, set_gain, ineq_gain, dt, out):
    """One explicit Euler step of ``x_i' = sum_j a_ij (x_j - x_i) - set_gain (x_i - P_i x_i) - ineq_gain d_i``."""
    drift = np.empty_like(x)
    consensus_term(x, adj, drift)
    for i, (s, g) in enumerate(zip(pk.sets, pk.inequalities)):
        xi = x[i]
        drift[i] -= set_gain * (xi - s.project(xi)) + ineq_gain * _direction(g, xi, pk.block_scale)
    np.add(x, dt * drift, out=out)


def discrete_step(x, adj, h, alpha, beta, pk, out, y_out, grad_out):
    """One iteration of the discrete consensus/subgradient/projection update."""
    consensus_term(x, adj, y_out)
    y_out *= h
    y_out += x
    for i, (s, g) in enumerate(zip(pk.sets, pk.inequalities)):
        grad_out[i] = beta * _direction(g, y_out[i], pk.block_scale)
        xi = y_out[i] - grad_out[i]
        out[i] = xi - alpha * (xi - s.project(xi))


def _bad(x, bound):
    return not np.all(np.abs(x) <= bound)


def continuous_steps(x, adj, pk, set_gain, ineq_gain, dt, count, bound):
    """Advance ``x`` in place by ``count`` Euler steps; returns steps taken before divergence."""
    tmp = np.empty_like(x)
    for s in range(count):
        continuous_step(x, adj, pk, set_gain, ineq_gain, dt, tmp)
        if _bad(tmp, bound):
            return s
        x[...] = tmp
    return count


def discrete_steps(x, adj, h, alphas, betas, pk, bound):
    """Advance ``x`` in place by ``len(alphas)`` iterations; returns iterations taken before divergence."""
    tmp, y, g = np.empty_like(x), np.empty_like(x), np.empty_like(x)
    for s in range(len(alphas)):
        discrete_step(x, adj, h, alphas[s], betas[s], pk, tmp, y, g)
        if _bad(tmp, bound):
            return s
        x[...] = tmp
    return len(alphas)
