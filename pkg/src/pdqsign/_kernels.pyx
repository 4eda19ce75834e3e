# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: pairwise-difference order statistics and Weiszfeld.

Both functions mirror ``_kernels_py`` line for line; the Python module is
the reference and the test suite checks the two agree.
"""

from libc.math cimport fabs, sqrt
from libc.stdlib cimport calloc, free
from libcpp.algorithm cimport nth_element
from libcpp.vector cimport vector

import numpy as np

# vertex test radius, relative to the data spread
DEF VERTEX_NEAR = 1e-2


def pairwise_kth(const double[:, ::1] cols, Py_ssize_t k):
    """k-th smallest (1-based) pairwise absolute difference of each row of ``cols``.

    ``cols`` is p x n: one row per coordinate.
    """
    cdef Py_ssize_t p = cols.shape[0]
    cdef Py_ssize_t n = cols.shape[1]
    cdef Py_ssize_t m = n * (n - 1) // 2
    if k < 1 or k > m:
        raise ValueError(f"rank {k} outside 1..{m}")
    out = np.empty(p, dtype=np.float64)
    cdef double[::1] res = out
    cdef vector[double] buf
    buf.resize(m)
    cdef Py_ssize_t j, i, l, t
    cdef double xi
    with nogil:
        for j in range(p):
            t = 0
            for i in range(n - 1):
                xi = cols[j, i]
                for l in range(i + 1, n):
                    buf[t] = fabs(xi - cols[j, l])
                    t += 1
            nth_element(buf.begin(), buf.begin() + (k - 1), buf.end())
            res[j] = buf[k - 1]
    return out


cdef bint _vertex_optimal(const double[:, ::1] z, Py_ssize_t k, double zero_guard) noexcept nogil:
    """True when data point ``k`` minimises the objective.

    With ``R`` the sum of unit vectors from ``z[k]`` to the other points and
    ``eta`` the multiplicity of ``z[k]``, the point is optimal iff ``||R|| <= eta``.
    """
    cdef Py_ssize_t n = z.shape[0], p = z.shape[1], i, j
    cdef double acc, diff, r, rnorm = 0.0
    cdef Py_ssize_t eta = 0
    cdef double *R = <double *> calloc(p, sizeof(double))
    for i in range(n):
        acc = 0.0
        for j in range(p):
            diff = z[i, j] - z[k, j]
            acc += diff * diff
        r = sqrt(acc)
        if r < zero_guard:
            eta += 1
            continue
        for j in range(p):
            R[j] += (z[i, j] - z[k, j]) / r
    for j in range(p):
        rnorm += R[j] * R[j]
    free(R)
    return sqrt(rnorm) <= eta


cdef Py_ssize_t _nearest(const double[:, ::1] z, double[::1] m, double *best) noexcept nogil:
    cdef Py_ssize_t n = z.shape[0], p = z.shape[1], i, j, k = 0
    cdef double acc, diff
    best[0] = -1.0
    for i in range(n):
        acc = 0.0
        for j in range(p):
            diff = z[i, j] - m[j]
            acc += diff * diff
        if best[0] < 0 or acc < best[0]:
            best[0] = acc
            k = i
    best[0] = sqrt(best[0])
    return k


def weiszfeld(const double[:, ::1] z, double[::1] m0, double tol, Py_ssize_t max_iter,
              double zero_guard, double scale, bint track_objective=False):
    """Weiszfeld iteration with the Vardi-Zhang correction at data points.

    When the iterate comes within ``VERTEX_NEAR * scale`` of a data point
    that point is tested for optimality and taken as the answer if it
    passes, since plain iterations approach a vertex minimiser slowly.

    Returns ``(m, iterations, converged, objective_trace)``.
    """
    cdef Py_ssize_t n = z.shape[0]
    cdef Py_ssize_t p = z.shape[1]
    m_arr = np.array(m0, dtype=np.float64, copy=True)
    cdef double[::1] m = m_arr
    cdef double[::1] num = np.empty(p)
    cdef double[::1] grad = np.empty(p)
    cdef double[::1] dist = np.empty(n)
    cdef Py_ssize_t it = 0, i, j, eta, k
    cdef double den, r, acc, gnorm, gamma, step, diff, obj, tnew, near
    cdef bint converged = False
    trace = [] if track_objective else None

    while it < max_iter:
        it += 1
        obj = 0.0
        k = 0
        for i in range(n):
            acc = 0.0
            for j in range(p):
                diff = z[i, j] - m[j]
                acc += diff * diff
            dist[i] = sqrt(acc)
            obj += dist[i]
            if dist[i] < dist[k]:
                k = i
        if track_objective:
            trace.append(obj)
        if zero_guard <= dist[k] < VERTEX_NEAR * scale and _vertex_optimal(z, k, zero_guard):
            for j in range(p):
                m[j] = z[k, j]
            converged = True
            break

        for j in range(p):
            num[j] = 0.0
            grad[j] = 0.0
        den = 0.0
        eta = 0
        for i in range(n):
            r = dist[i]
            if r < zero_guard:
                eta += 1
                continue
            den += 1.0 / r
            for j in range(p):
                num[j] += z[i, j] / r
                grad[j] += (z[i, j] - m[j]) / r

        if den == 0.0:
            converged = True
            break
        if eta > 0:
            gnorm = 0.0
            for j in range(p):
                gnorm += grad[j] * grad[j]
            gnorm = sqrt(gnorm)
            if gnorm <= eta:
                # the coincident data point is itself a minimiser
                converged = True
                break
            gamma = eta / gnorm
        else:
            gamma = 0.0

        step = 0.0
        for j in range(p):
            tnew = (1.0 - gamma) * (num[j] / den) + gamma * m[j]
            diff = tnew - m[j]
            step += diff * diff
            m[j] = tnew
        step = sqrt(step)
        if step <= tol * scale:
            converged = True
            k = _nearest(z, m, &near)
            if zero_guard <= near < VERTEX_NEAR * scale and _vertex_optimal(z, k, zero_guard):
                for j in range(p):
                    m[j] = z[k, j]
            break

    if track_objective:
        obj = 0.0
        for i in range(n):
            acc = 0.0
            for j in range(p):
                diff = z[i, j] - m[j]
                acc += diff * diff
            obj += sqrt(acc)
        trace.append(obj)
    return m_arr, int(it), bool(converged), trace
