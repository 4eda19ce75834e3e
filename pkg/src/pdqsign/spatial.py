"""Standardized spatial median, fitted signs and the plug-ins Omega-hat, G-hat."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .elliptical import as_sample
from .errors import DegenerateFit, NotConverged
from .pdq import DiagonalScale


@dataclass(frozen=True)
class MedianOptions:
    """Solver settings for the Weiszfeld iteration.

    ``tol`` bounds the step length relative to the data spread (mean
    distance of the points to their coordinatewise median), and
    ``zero_guard`` is likewise relative to that spread.
    """

    tol: float = 1e-8
    max_iter: int = 500
    zero_guard: float = 1e-12
    max_zero_fraction: float = 0.1

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass
class SpatialFit:
    theta_hat: np.ndarray
    signs: np.ndarray
    resid_norms: np.ndarray
    omega_hat: np.ndarray
    g_hat: np.ndarray
    iterations: int
    converged: bool
    n_zero: int = 0
    zero_guard: float = 0.0


def spatial_signs(y, zero_guard=0.0):
    """Row-wise ``U(y) = y / ||y||`` with ``U(0) = 0`` below ``zero_guard``.

    Returns ``(signs, norms, zero_mask)``.
    """
    norms = np.sqrt(np.einsum("ij,ij->i", y, y))
    zero = norms <= zero_guard
    safe = np.where(zero, 1.0, norms)
    signs = y / safe[:, None]
    signs[zero] = 0.0
    return signs, norms, zero


def _spread(points, center):
    return float(np.mean(np.sqrt(((points - center) ** 2).sum(axis=1))))


def geometric_median(points, opts: MedianOptions = MedianOptions(), *, track_objective=False):
    """Minimiser of ``sum_i ||x_i - m||`` by Weiszfeld's fixed point.

    Starts at the coordinatewise median; when the iterate lands on a data
    point the Vardi-Zhang step is used instead of the plain update.

    Returns
    -------
    m : ndarray
    iterations : int
    converged : bool
    trace : list of float, only when ``track_objective`` is set
    """
    z = np.ascontiguousarray(points, dtype=np.float64)
    if z.ndim != 2 or z.shape[0] < 2:
        raise ValueError("need an n x p array with n >= 2")
    m0 = np.median(z, axis=0)
    scale = _spread(z, m0)
    if scale == 0.0:
        raise DegenerateFit("all points coincide")
    m, it, converged, trace = kernels.weiszfeld(
        z, m0, opts.tol, opts.max_iter, opts.zero_guard * scale, scale, track_objective
    )
    if not converged:
        raise NotConverged(f"Weiszfeld did not converge in {it} iterations", last_iterate=m, iterations=it)
    if track_objective:
        return m, it, converged, trace
    return m, it, converged


def fit(sample, scale: DiagonalScale, opts: MedianOptions = MedianOptions()) -> SpatialFit:
    """Spatial median of the ``scale``-standardized sample with its fitted signs."""
    x = as_sample(sample)
    root = np.sqrt(scale.d)
    z = x / root
    m, it, converged = geometric_median(z, opts)
    y = z - m
    spread = _spread(z, np.median(z, axis=0))
    guard = opts.zero_guard * spread
    signs, norms, zero = spatial_signs(y, guard)
    n, p = x.shape
    n_zero = int(zero.sum())
    if n_zero > opts.max_zero_fraction * n:
        raise DegenerateFit(f"{n_zero} of {n} observations coincide with the spatial median")
    omega = signs.T @ signs / n
    live = ~zero
    w = 1.0 / norms[live]
    s_live = signs[live]
    g = w.mean() * np.eye(p) - (s_live * w[:, None]).T @ s_live / live.sum()
    return SpatialFit(
        theta_hat=root * m,
        signs=signs,
        resid_norms=norms,
        omega_hat=(omega + omega.T) / 2,
        g_hat=(g + g.T) / 2,
        iterations=it,
        converged=converged,
        n_zero=n_zero,
        zero_guard=guard,
    )
