"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np

# bound on the number of pairwise differences materialised at once
_CHUNK_ELEMS = 4_000_000
# vertex test radius, relative to the data spread
VERTEX_NEAR = 1e-2


def pairwise_kth(cols, k):
    """k-th smallest (1-based) pairwise absolute difference of each row of ``cols``.

    ``cols`` is p x n: one row per coordinate.
    """
    cols = np.asarray(cols, dtype=np.float64)
    p, n = cols.shape
    m = n * (n - 1) // 2
    if k < 1 or k > m:
        raise ValueError(f"rank {k} outside 1..{m}")
    iu, ju = np.triu_indices(n, 1)
    out = np.empty(p)
    step = max(1, _CHUNK_ELEMS // max(m, 1))
    for start in range(0, p, step):
        block = cols[start:start + step]
        diffs = np.abs(block[:, iu] - block[:, ju])
        out[start:start + step] = np.partition(diffs, k - 1, axis=1)[:, k - 1]
    return out


def _vertex_optimal(z, k, zero_guard):
    """True when data point ``k`` minimises the objective (``||R|| <= multiplicity``)."""
    resid = z - z[k]
    r = np.sqrt(np.einsum("ij,ij->i", resid, resid))
    live = r >= zero_guard
    R = (resid[live] / r[live, None]).sum(axis=0)
    return np.sqrt(R @ R) <= np.count_nonzero(~live)


def weiszfeld(z, m0, tol, max_iter, zero_guard, scale, track_objective=False):
    """Weiszfeld iteration with the Vardi-Zhang correction at data points.

    When the iterate comes within ``VERTEX_NEAR * scale`` of a data point
    that point is tested for optimality and taken as the answer if it
    passes, since plain iterations approach a vertex minimiser slowly.

    Returns ``(m, iterations, converged, objective_trace)``.
    """
    z = np.asarray(z, dtype=np.float64)
    m = np.array(m0, dtype=np.float64, copy=True)
    trace = [] if track_objective else None
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        resid = z - m
        dist = np.sqrt(np.einsum("ij,ij->i", resid, resid))
        if track_objective:
            trace.append(float(dist.sum()))
        k = int(np.argmin(dist))
        if zero_guard <= dist[k] < VERTEX_NEAR * scale and _vertex_optimal(z, k, zero_guard):
            m = z[k].copy()
            converged = True
            break
        live = dist >= zero_guard
        eta = int(np.count_nonzero(~live))
        inv = np.zeros_like(dist)
        inv[live] = 1.0 / dist[live]
        den = inv.sum()
        if den == 0.0:
            converged = True
            break
        if eta > 0:
            grad = inv @ resid
            gnorm = np.sqrt(grad @ grad)
            if gnorm <= eta:
                converged = True
                break
            gamma = eta / gnorm
        else:
            gamma = 0.0
        new = (1.0 - gamma) * ((inv @ z) / den) + gamma * m
        step = np.sqrt(np.sum((new - m) ** 2))
        m = new
        if step <= tol * scale:
            converged = True
            near = np.sqrt(np.einsum("ij,ij->i", z - m, z - m))
            k = int(np.argmin(near))
            if zero_guard <= near[k] < VERTEX_NEAR * scale and _vertex_optimal(z, k, zero_guard):
                m = z[k].copy()
            break
    if track_objective:
        trace.append(float(np.sqrt(((z - m) ** 2).sum(axis=1)).sum()))
    return m, it, converged, trace
