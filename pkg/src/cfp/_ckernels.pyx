# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled step kernels. Semantics match ``cfp._pykernels``."""

from libc.math cimport sqrt


cdef void _project(int kind, const double[::1] p1, const double[::1] p2, double s,
                   double* x, double* out, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t k
    cdef double dot = 0.0, nrm = 0.0, r
    if kind == 1:  # box
        for k in range(m):
            r = x[k]
            if r < p1[k]:
                r = p1[k]
            elif r > p2[k]:
                r = p2[k]
            out[k] = r
        return
    if kind == 2 or kind == 4:  # halfspace, hyperplane
        for k in range(m):
            dot += p1[k] * x[k]
            nrm += p1[k] * p1[k]
        dot -= s
        if kind == 2 and dot <= 0.0:
            for k in range(m):
                out[k] = x[k]
            return
        r = dot / nrm
        for k in range(m):
            out[k] = x[k] - r * p1[k]
        return
    if kind == 3:  # ball
        for k in range(m):
            nrm += (x[k] - p1[k]) * (x[k] - p1[k])
        nrm = sqrt(nrm)
        if nrm <= s:
            for k in range(m):
                out[k] = x[k]
            return
        r = s / nrm
        for k in range(m):
            out[k] = p1[k] + r * (x[k] - p1[k])
        return
    for k in range(m):
        out[k] = x[k]


cdef void _direction(Py_ssize_t i, const int[::1] kind, const double[:, ::1] a,
                     const double[::1] sc, const double[:, :, ::1] Q,
                     const double[:, :, ::1] bA, const double[:, ::1] bb,
                     const int[::1] brows, double bscale,
                     double* x, double* out, double* tmp, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t k, l, rows
    cdef double g = 0.0, q
    cdef int kd = kind[i]
    for k in range(m):
        out[k] = 0.0
    if kd == 1:  # linear a.x - b
        for k in range(m):
            g += a[i, k] * x[k]
        if g - sc[i] > 0.0:
            for k in range(m):
                out[k] = a[i, k]
    elif kd == 2:  # quadratic x.Qx + c.x + d
        for k in range(m):
            q = 0.0
            for l in range(m):
                q += Q[i, k, l] * x[l]
            tmp[k] = q
            g += x[k] * q + a[i, k] * x[k]
        if g + sc[i] > 0.0:
            for k in range(m):
                out[k] = 2.0 * tmp[k] + a[i, k]
    elif kd == 3:  # linear block through ||(Ax - b)^+||^2
        rows = brows[i]
        for l in range(rows):
            q = -bb[i, l]
            for k in range(m):
                q += bA[i, l, k] * x[k]
            if q > 0.0:
                for k in range(m):
                    out[k] += bscale * bA[i, l, k] * q


cdef void _consensus(const double[:, ::1] x, const double[:, ::1] adj, Py_ssize_t i,
                     double* out, Py_ssize_t n, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t j, k
    cdef double w
    for k in range(m):
        out[k] = 0.0
    for j in range(n):
        w = adj[i, j]
        if w != 0.0 and j != i:
            for k in range(m):
                out[k] += w * (x[j, k] - x[i, k])


def consensus_term(const double[:, ::1] x, const double[:, ::1] adj, double[:, ::1] out):
    cdef Py_ssize_t i, n = x.shape[0], m = x.shape[1]
    with nogil:
        for i in range(n):
            _consensus(x, adj, i, &out[i, 0], n, m)


def continuous_step(const double[:, ::1] x, const double[:, ::1] adj, pk,
                    double set_gain, double ineq_gain, double dt, double[:, ::1] out):
    cdef Py_ssize_t i, k, n = x.shape[0], m = x.shape[1]
    cdef const int[::1] skind = pk.set_kind
    cdef const double[:, ::1] sp1 = pk.set_p1
    cdef const double[:, ::1] sp2 = pk.set_p2
    cdef const double[::1] ss = pk.set_s
    cdef const int[::1] ikind = pk.ineq_kind
    cdef const double[:, ::1] ia = pk.ineq_a
    cdef const double[::1] isc = pk.ineq_s
    cdef const double[:, :, ::1] iQ = pk.ineq_Q
    cdef const double[:, :, ::1] bA = pk.blk_A
    cdef const double[:, ::1] bb = pk.blk_b
    cdef const int[::1] brows = pk.blk_rows
    cdef double bscale = pk.block_scale
    cdef double[:, ::1] work = _scratch(4, m)
    with nogil:
        for i in range(n):
            _consensus(x, adj, i, &work[0, 0], n, m)
            _project(skind[i], sp1[i], sp2[i], ss[i], &x[i, 0], &work[1, 0], m)
            _direction(i, ikind, ia, isc, iQ, bA, bb, brows, bscale,
                       &x[i, 0], &work[2, 0], &work[3, 0], m)
            for k in range(m):
                out[i, k] = x[i, k] + dt * (work[0, k] - set_gain * (x[i, k] - work[1, k])
                                            - ineq_gain * work[2, k])


def discrete_step(const double[:, ::1] x, const double[:, ::1] adj, double h,
                  double alpha, double beta, pk,
                  double[:, ::1] out, double[:, ::1] y_out, double[:, ::1] grad_out):
    cdef Py_ssize_t i, k, n = x.shape[0], m = x.shape[1]
    cdef const int[::1] skind = pk.set_kind
    cdef const double[:, ::1] sp1 = pk.set_p1
    cdef const double[:, ::1] sp2 = pk.set_p2
    cdef const double[::1] ss = pk.set_s
    cdef const int[::1] ikind = pk.ineq_kind
    cdef const double[:, ::1] ia = pk.ineq_a
    cdef const double[::1] isc = pk.ineq_s
    cdef const double[:, :, ::1] iQ = pk.ineq_Q
    cdef const double[:, :, ::1] bA = pk.blk_A
    cdef const double[:, ::1] bb = pk.blk_b
    cdef const int[::1] brows = pk.blk_rows
    cdef double bscale = pk.block_scale
    cdef double[:, ::1] work = _scratch(4, m)
    with nogil:
        for i in range(n):
            _consensus(x, adj, i, &work[0, 0], n, m)
            for k in range(m):
                y_out[i, k] = x[i, k] + h * work[0, k]
        for i in range(n):
            _direction(i, ikind, ia, isc, iQ, bA, bb, brows, bscale,
                       &y_out[i, 0], &work[1, 0], &work[3, 0], m)
            for k in range(m):
                grad_out[i, k] = beta * work[1, k]
                work[2, k] = y_out[i, k] - grad_out[i, k]
            _project(skind[i], sp1[i], sp2[i], ss[i], &work[2, 0], &work[0, 0], m)
            for k in range(m):
                out[i, k] = work[2, k] - alpha * (work[2, k] - work[0, k])


cdef double[:, ::1] _scratch(Py_ssize_t rows, Py_ssize_t m):
    import numpy as np
    return np.empty((rows, m))


cdef bint _bad(const double[:, ::1] x, double bound) noexcept nogil:
    cdef Py_ssize_t i, k
    cdef double v
    for i in range(x.shape[0]):
        for k in range(x.shape[1]):
            v = x[i, k]
            if not (v == v) or v > bound or v < -bound:  # NaN, overflow or divergence
                return True
    return False


def continuous_steps(double[:, ::1] x, const double[:, ::1] adj, pk, double set_gain,
                     double ineq_gain, double dt, Py_ssize_t count, double bound):
    """Advance ``x`` in place by ``count`` Euler steps; returns steps taken before divergence."""
    cdef Py_ssize_t s
    cdef double[:, ::1] tmp = _scratch(x.shape[0], x.shape[1])
    for s in range(count):
        continuous_step(x, adj, pk, set_gain, ineq_gain, dt, tmp)
        if _bad(tmp, bound):
            return s
        x[:, :] = tmp
    return count


def discrete_steps(double[:, ::1] x, const double[:, ::1] adj, double h,
                   const double[::1] alphas, const double[::1] betas, pk, double bound):
    """Advance ``x`` in place by ``len(alphas)`` iterations; returns iterations taken before divergence."""
    cdef Py_ssize_t s, count = alphas.shape[0]
    cdef double[:, ::1] tmp = _scratch(x.shape[0], x.shape[1])
    cdef double[:, ::1] y = _scratch(x.shape[0], x.shape[1])
    cdef double[:, ::1] g = _scratch(x.shape[0], x.shape[1])
    for s in range(count):
        discrete_step(x, adj, h, alphas[s], betas[s], pk, tmp, y, g)
        if _bad(tmp, bound):
            return s
        x[:, :] = tmp
    return count
