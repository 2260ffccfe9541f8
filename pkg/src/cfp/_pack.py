"""Array view of a problem, consumed by both kernel backends."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .convex import Ball, Box, Halfspace, Hyperplane, LinearBlock, Linear, Quadratic, WholeSpace


@dataclass(frozen=True, eq=False)
class Packed:
    sets: tuple
    inequalities: tuple
    # LinearBlock direction scale: 2 gives grad psi, 1 gives A^T (Ax - b)^+
    block_scale: float
    set_kind: np.ndarray
    set_p1: np.ndarray
    set_p2: np.ndarray
    set_s: np.ndarray
    ineq_kind: np.ndarray
    ineq_a: np.ndarray
    ineq_s: np.ndarray
    ineq_Q: np.ndarray
    blk_A: np.ndarray
    blk_b: np.ndarray
    blk_rows: np.ndarray


def pack(sets, inequalities, block_scale: float = 2.0) -> Packed:
    n = len(sets)
    m = sets[0].dim
    set_kind = np.zeros(n, dtype=np.int32)
    set_p1 = np.zeros((n, m))
    set_p2 = np.zeros((n, m))
    set_s = np.zeros(n)
    for i, s in enumerate(sets):
        set_kind[i] = s.kind
        if isinstance(s, Box):
            set_p1[i], set_p2[i] = s.lower, s.upper
        elif isinstance(s, (Halfspace, Hyperplane)):
            set_p1[i], set_s[i] = s.a, s.b
        elif isinstance(s, Ball):
            set_p1[i], set_s[i] = s.center, s.radius
        elif not isinstance(s, WholeSpace):
            raise TypeError(f"no packed form for {type(s).__name__}")

    rows = max([g.A.shape[0] for g in inequalities if isinstance(g, LinearBlock)], default=1)
    ineq_kind = np.zeros(n, dtype=np.int32)
    ineq_a = np.zeros((n, m))
    ineq_s = np.zeros(n)
    ineq_Q = np.zeros((n, m, m))
    blk_A = np.zeros((n, rows, m))
    blk_b = np.zeros((n, rows))
    blk_rows = np.zeros(n, dtype=np.int32)
    for i, g in enumerate(inequalities):
        ineq_kind[i] = g.kind
        if isinstance(g, Linear):
            ineq_a[i], ineq_s[i] = g.a, g.b
        elif isinstance(g, Quadratic):
            ineq_Q[i], ineq_a[i], ineq_s[i] = g.Q, g.c, g.d
        elif isinstance(g, LinearBlock):
            r = g.A.shape[0]
            blk_A[i, :r], blk_b[i, :r], blk_rows[i] = g.A, g.b, r
        else:
            raise TypeError(f"no packed form for {type(g).__name__}")
    return Packed(
        tuple(sets), tuple(inequalities), float(block_scale),
        set_kind, set_p1, set_p2, set_s,
        ineq_kind, ineq_a, ineq_s, ineq_Q, blk_A, blk_b, blk_rows,
    )
