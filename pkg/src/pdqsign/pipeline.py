"""End-to-end feasible PDQ test: scales, spatial fits, K-hat, statistic, bootstrap."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bootstrap import BootstrapResult, calibrate, tau_star
from .elliptical import as_sample
from .errors import InvalidDimension
from .pdq import DiagonalScale, estimate_diag
from .spatial import MedianOptions, SpatialFit, fit
from .statistic import KMatrices, TestStatistic, compute_K, compute_statistic


@dataclass
class TestOutcome:
    statistic: TestStatistic
    bootstrap: BootstrapResult | None
    K: KMatrices
    fit1: SpatialFit
    fit2: SpatialFit
    scale1: DiagonalScale
    scale2: DiagonalScale
    tau_star_hat: float
    config: dict = field(default_factory=dict)

    __test__ = False

    @property
    def reject(self):
        return None if self.bootstrap is None else self.bootstrap.reject

    @property
    def p_value(self):
        return None if self.bootstrap is None else self.bootstrap.p_value

    def diagnostics(self):
        return {
            "tau_star_hat": self.tau_star_hat,
            "cond_G1": self.K.cond_G1,
            "cond_G2": self.K.cond_G2,
            "iterations": [self.fit1.iterations, self.fit2.iterations],
            "zero_residuals": [self.fit1.n_zero, self.fit2.n_zero],
            "n": [len(self.fit1.signs), len(self.fit2.signs)],
            "p": int(self.fit1.signs.shape[1]),
        }

    def to_dict(self, include_draws=False):
        out = {"statistic": self.statistic.to_dict()}
        if self.bootstrap is not None:
            out.update(self.bootstrap.to_dict(include_draws=include_draws))
        else:
            out["tau_star_hat"] = self.tau_star_hat
        out["diagnostics"] = self.diagnostics()
        out["config"] = dict(self.config)
        return out


def prepare(x1, x2, alpha=0.5, opts=MedianOptions(), scales=None):
    """Everything up to the statistic: returns ``(stat, K, fit1, fit2, scale1, scale2)``."""
    x1 = as_sample(x1, "x1")
    x2 = as_sample(x2, "x2")
    if x1.shape[1] != x2.shape[1]:
        raise InvalidDimension(f"dimension mismatch: {x1.shape[1]} vs {x2.shape[1]}")
    if scales is None:
        s1, s2 = estimate_diag(x1, alpha), estimate_diag(x2, alpha)
    else:
        s1, s2 = scales
    f1 = fit(x1, s1, opts)
    f2 = fit(x2, s2, opts)
    K = compute_K(s1, s2, f1.g_hat, f2.g_hat)
    stat = compute_statistic(x1, x2, s1, s2, f1, f2, K)
    return stat, K, f1, f2, s1, s2


def pdq_test(x1, x2, alpha: float = 0.5, B: int | None = 200, level: float = 0.05, rng=None,
             opts: MedianOptions = MedianOptions(), scales=None) -> TestOutcome:
    """Feasible PDQ spatial-sign test of equal locations.

    Parameters
    ----------
    x1, x2 : array_like
        n1 x p and n2 x p samples.
    alpha : float
        Quantile level of the pairwise-difference scale.
    B : int or None
        Bootstrap resamples; ``None`` skips calibration (statistic only).
    level : float
        Nominal size of the one-sided upper-tail test.
    rng : Generator or int, optional
        Source of the Rademacher multipliers.
    scales : pair of DiagonalScale, optional
        Precomputed diagonal scales, bypassing the PDQ step.
    """
    stat, K, f1, f2, s1, s2 = prepare(x1, x2, alpha, opts, scales)
    if B is None:
        boot = None
        ts = tau_star(f1.signs, f2.signs, K)
    else:
        boot = calibrate(stat, f1.signs, f2.signs, K, B, level, rng)
        ts = boot.tau_star_hat
    config = {"alpha": alpha, "B": B, "level": level}
    return TestOutcome(stat, boot, K, f1, f2, s1, s2, ts, config)
