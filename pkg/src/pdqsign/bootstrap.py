"""Rademacher wild-bootstrap calibration of the PDQ statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import as_generator
from .statistic import KMatrices, TestStatistic


@dataclass
class BootstrapResult:
    draws: np.ndarray
    critical_value: float
    p_value: float
    tau_star_hat: float
    reject: bool
    B: int
    level: float

    def to_dict(self, include_draws=True):
        out = {
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "tau_star_hat": self.tau_star_hat,
            "reject": self.reject,
            "B": self.B,
            "level": self.level,
        }
        if include_draws:
            out["draws"] = self.draws.tolist()
        return out


def rademacher(shape, rng) -> np.ndarray:
    """Independent +/-1 multipliers with equal probability."""
    return 2.0 * rng.integers(0, 2, size=shape) - 1.0


def quadratic_forms(E1, E2, S1, S2, K: KMatrices) -> np.ndarray:
    """``Q*`` for each row of the multiplier blocks ``E1`` (B x n1), ``E2`` (B x n2)."""
    sb1 = E1 @ S1 / S1.shape[0]
    sb2 = E2 @ S2 / S2.shape[0]
    return (
        np.sum((sb1 @ K.K1) * sb1, axis=1)
        + np.sum((sb2 @ K.K2) * sb2, axis=1)
        - np.sum((sb1 @ K.K3) * sb2, axis=1)
    )


def bootstrap_draw(S1, S2, K: KMatrices, b_hat: float, rng, multipliers=None) -> float:
    """One centred bootstrap statistic ``T* = Q* - b_hat``.

    ``multipliers`` (length n1 + n2) overrides the random draw.
    """
    n1 = len(S1)
    if multipliers is None:
        multipliers = rademacher(n1 + len(S2), as_generator(rng))
    e = np.asarray(multipliers, dtype=float)
    q = quadratic_forms(e[None, :n1], e[None, n1:], S1, S2, K)[0]
    return float(q - b_hat)


def bootstrap_draws(S1, S2, K: KMatrices, b_hat: float, B: int, rng) -> np.ndarray:
    """``B`` draws of ``T*``; draw ``b`` uses row ``b`` of one (B, n1+n2) multiplier block."""
    rng = as_generator(rng)
    n1 = len(S1)
    e = rademacher((B, n1 + len(S2)), rng)
    return quadratic_forms(e[:, :n1], e[:, n1:], S1, S2, K) - b_hat


def _offdiag_sq(gram):
    return float(np.sum(gram * gram) - np.sum(np.diag(gram) ** 2))


def tau_star(S1, S2, K: KMatrices) -> float:
    """``sqrt(2 tr(H0^2))`` from three Gram matrices, never forming the N x N ``H0``."""
    n1, n2 = len(S1), len(S2)
    g11 = S1 @ K.K1 @ S1.T
    g22 = S2 @ K.K2 @ S2.T
    g12 = S1 @ K.K3 @ S2.T
    v = (
        2.0 / n1**4 * _offdiag_sq(g11)
        + 2.0 / n2**4 * _offdiag_sq(g22)
        + float(np.sum(g12 * g12)) / (n1**2 * n2**2)
    )
    return math.sqrt(max(v, 0.0))


def critical_rank(B: int, level: float) -> int:
    """Order-statistic rank ``ceil((B+1)(1-level))``; 0 means always reject."""
    return math.ceil(round((B + 1) * (1.0 - level), 9))


def decide(t: float, draws: np.ndarray, level: float):
    """Critical value, add-one p-value and decision for statistic ``t``."""
    B = len(draws)
    k = critical_rank(B, level)
    ordered = np.sort(draws)
    if k <= 0:
        crit = -math.inf
    elif k > B:
        crit = math.inf
    else:
        crit = float(ordered[k - 1])
    p_value = (1 + int(np.count_nonzero(draws >= t))) / (B + 1)
    return crit, p_value, bool(t > crit)


def calibrate(statistic: TestStatistic, S1, S2, K: KMatrices, B: int = 200,
              level: float = 0.05, rng=None) -> BootstrapResult:
    """Wild-bootstrap critical value and p-value for ``statistic.t``.

    The critical value is the ``ceil((B+1)(1-level))``-th smallest draw and
    the test rejects when ``t`` exceeds it. ``level = 1`` makes the rank
    zero, so the test always rejects.
    """
    if B < 19:
        raise ValueError("B must be at least 19")
    if not 0 < level <= 1:
        raise ValueError("level must lie in (0, 1]")
    draws = bootstrap_draws(S1, S2, K, statistic.b_hat, B, rng)
    crit, p_value, reject = decide(statistic.t, draws, level)
    return BootstrapResult(draws, crit, p_value, tau_star(S1, S2, K), reject, B, level)
