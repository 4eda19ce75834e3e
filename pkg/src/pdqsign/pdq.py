"""Coordinatewise pairwise-difference quantile (PDQ) diagonal scale."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .elliptical import as_sample
from .errors import DegenerateScale


@dataclass(frozen=True)
class DiagonalScale:
    """Per-coordinate scale ``d_j = q_j^2`` and the quantile level used."""

    d: np.ndarray
    alpha: float

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 1 or not np.all(np.isfinite(d)) or np.any(d <= 0):
            raise ValueError("diagonal scale must be a finite positive vector")
        object.__setattr__(self, "d", d)

    def scaled(self, c: float) -> "DiagonalScale":
        return DiagonalScale(self.d * c, self.alpha)


def pair_rank(n: int, alpha: float) -> int:
    """Rank ``ceil(alpha * C(n, 2))`` of the selected pairwise difference."""
    if n < 2:
        raise ValueError(f"need at least 2 values, got {n}")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    m = n * (n - 1) // 2
    # round() guards products like 0.3 * 10 = 3.0000000000000004
    return max(1, min(m, math.ceil(round(alpha * m, 9))))


def pairwise_quantile(values, alpha: float = 0.5) -> float:
    """alpha-quantile of the pairwise absolute differences of ``values``.

    Equals ``inf{t >= 0 : F(t) >= alpha}`` for the empirical CDF ``F`` of
    the ``C(n, 2)`` differences, i.e. the ``ceil(alpha C(n,2))``-th order
    statistic.

    >>> pairwise_quantile([0.0, 1.0, 3.0], 0.5)
    2.0
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    k = pair_rank(v.size, alpha)
    q = float(kernels.pairwise_kth(v[None, :].copy(), k)[0])
    if q == 0.0:
        raise DegenerateScale(0)
    return q


def pairwise_quantiles(x, alpha: float = 0.5) -> np.ndarray:
    """Column-wise :func:`pairwise_quantile` of an n x p matrix (no zero check)."""
    x = np.asarray(x, dtype=np.float64)
    k = pair_rank(x.shape[0], alpha)
    return kernels.pairwise_kth(np.ascontiguousarray(x.T), k)


def estimate_diag(sample, alpha: float = 0.5) -> DiagonalScale:
    """PDQ diagonal estimate ``d_j = q_j^2`` for every coordinate.

    Raises
    ------
    DegenerateScale
        If a coordinate's selected difference is zero; ``coordinate``
        holds the first offending index.
    """
    x = as_sample(sample)
    q = pairwise_quantiles(x, alpha)
    zero = np.flatnonzero(q == 0.0)
    if zero.size:
        raise DegenerateScale(int(zero[0]))
    return DiagonalScale(q * q, alpha)
