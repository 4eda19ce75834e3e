"""SST baseline: bias-corrected spatial-sign statistic with a joint (theta, D) fixed point.

The variance used for the normal reference is a reconstruction
(the leading-term variance with identity K matrices), not a published
estimator; treat SST size results as qualitative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .elliptical import as_sample
from .errors import DegenerateFit, NotConverged
from .spatial import spatial_signs


@dataclass
class SstFit:
    theta_tilde: np.ndarray
    d_tilde: np.ndarray
    c_hat: float
    iterations: int
    converged: bool


@dataclass
class SstResult:
    statistic: float
    sigma: float
    z: float
    reject: bool
    level: float
    fit1: SstFit
    fit2: SstFit


def _initial(x):
    theta = np.median(x, axis=0)
    mad = np.median(np.abs(x - theta), axis=0)
    if np.any(mad <= 0):
        raise DegenerateFit("zero MAD in initial diagonal")
    return theta, mad**2


def sst_sweep(x, theta, d):
    """One joint update: returns ``(theta_new, d_new, eps_norms)``.

    ``eps = D^{-1/2}(x - theta)``; ``theta`` moves by
    ``D^{1/2} sum U(eps) / sum ||eps||^{-1}`` and
    ``D <- p D diag(mean U(eps) U(eps)^T)``.
    """
    p = x.shape[1]
    root = np.sqrt(d)
    u, norms, zero = spatial_signs((x - theta) / root)
    if zero.any():
        raise DegenerateFit("zero standardized residual in SST iteration")
    step = root * u.sum(axis=0) / (1.0 / norms).sum()
    return theta + step, p * d * np.mean(u * u, axis=0), norms


def sst_fit(sample, tol: float = 1e-6, max_iter: int = 1000) -> SstFit:
    """Joint location/diagonal fixed point of :func:`sst_sweep`.

    Starts from the coordinatewise median and squared MADs; stops when
    both the standardized location step (relative to the mean residual
    norm) and the largest relative change of ``D`` fall below ``tol``.
    """
    x = as_sample(sample)
    theta, d = _initial(x)
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        theta_new, d_new, norms = sst_sweep(x, theta, d)
        theta_move = np.linalg.norm((theta_new - theta) / np.sqrt(d)) / norms.mean()
        d_move = np.max(np.abs(d_new / d - 1.0))
        theta, d = theta_new, d_new
        if theta_move < tol and d_move < tol:
            converged = True
            break
    if not converged:
        raise NotConverged(f"SST iteration did not converge in {it} sweeps", last_iterate=theta, iterations=it)
    norms = np.linalg.norm((x - theta) / np.sqrt(d), axis=1)
    if np.any(norms == 0):
        raise DegenerateFit("zero standardized residual at the SST fit")
    return SstFit(theta, d, float(np.mean(1.0 / norms)), it, converged)


def sst_signs(x, fit_: SstFit, center=None):
    center = fit_.theta_tilde if center is None else center
    return spatial_signs((np.asarray(x, float) - center) / np.sqrt(fit_.d_tilde))[0]


def sst_statistic(sample1, sample2, fit1: SstFit, fit2: SstFit) -> float:
    """Cross sign product minus the two trace corrections."""
    x1, x2 = np.asarray(sample1, float), np.asarray(sample2, float)
    n1, p = x1.shape
    n2 = len(x2)
    a1 = sst_signs(x1, fit1, fit2.theta_tilde)
    a2 = sst_signs(x2, fit2, fit1.theta_tilde)
    cross = -float(a1.sum(axis=0) @ a2.sum(axis=0)) / (n1 * n2)
    r12 = np.sqrt(fit1.d_tilde) / np.sqrt(fit2.d_tilde)
    corr1 = fit2.c_hat / (fit1.c_hat * n1 * p) * np.sum(r12)
    corr2 = fit1.c_hat / (fit2.c_hat * n2 * p) * np.sum(1.0 / r12)
    return cross - corr1 - corr2


def sst_sigma(x1, x2, fit1: SstFit, fit2: SstFit) -> float:
    """Normal-reference sd of the SST statistic.

    ``sqrt(2tr(O1^2)/n1^2 + 2tr(O2^2)/n2^2 + 4tr(O1 O2)/(n1 n2))`` with
    ``tr(Ok^2)`` estimated by the diagonal-deleted U-statistic
    ``sum_{i != l} (S_i^T S_l)^2 / (n(n-1))``; the plug-in ``tr(Ok_hat^2)``
    is biased upward by ``(1 - tr(Ok^2)) / n``.
    """
    s1, s2 = sst_signs(x1, fit1), sst_signs(x2, fit2)
    n1, n2 = len(s1), len(s2)
    g1, g2, g12 = s1 @ s1.T, s2 @ s2.T, s1 @ s2.T
    tr1 = (np.sum(g1 * g1) - np.sum(np.diag(g1) ** 2)) / (n1 * (n1 - 1))
    tr2 = (np.sum(g2 * g2) - np.sum(np.diag(g2) ** 2)) / (n2 * (n2 - 1))
    tr12 = np.sum(g12 * g12) / (n1 * n2)
    var = 2 * tr1 / n1**2 + 2 * tr2 / n2**2 + 4 * tr12 / (n1 * n2)
    return float(np.sqrt(max(var, 0.0)))


def sst_test(sample1, sample2, level: float = 0.05, tol: float = 1e-6, max_iter: int = 1000) -> SstResult:
    """One-sided normal-reference SST test: reject when ``T / sigma > z_{1-level}``."""
    x1, x2 = as_sample(sample1, "x1"), as_sample(sample2, "x2")
    f1 = sst_fit(x1, tol, max_iter)
    f2 = sst_fit(x2, tol, max_iter)
    t = sst_statistic(x1, x2, f1, f2)
    sigma = sst_sigma(x1, x2, f1, f2)
    z = t / sigma
    return SstResult(t, sigma, z, bool(z > stats.norm.ppf(1 - level)), level, f1, f2)
