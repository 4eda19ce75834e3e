"""Feasible PDQ statistic, its K-matrix plumbing, and oracle null-law quantities."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import SingularG, SingularOmega
from .pdq import DiagonalScale
from .rng import as_generator
from .spatial import SpatialFit, spatial_signs

EIG_FLOOR = 1e-10


@dataclass(frozen=True)
class KMatrices:
    K1: np.ndarray
    K2: np.ndarray
    K3: np.ndarray
    cond_G1: float = float("nan")
    cond_G2: float = float("nan")

    def scaled(self, c):
        return KMatrices(c * self.K1, c * self.K2, c * self.K3, self.cond_G1, self.cond_G2)


@dataclass(frozen=True)
class TestStatistic:
    r_hat: float
    b_hat: float
    t: float

    __test__ = False  # not a pytest class

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class OracleNull:
    B: np.ndarray
    eigenvalues: np.ndarray
    tau: float
    delta_row: float

    def to_dict(self):
        return {
            "B": self.B.tolist(),
            "eigenvalues": self.eigenvalues.tolist(),
            "tau": self.tau,
            "delta_row": self.delta_row,
        }


def _floored_inverse(g, name):
    w, v = np.linalg.eigh((g + g.T) / 2)
    lmax = w[-1]
    if not lmax > 0:
        raise SingularG(f"{name} has no positive eigenvalue (max {lmax:.3g})")
    w = np.maximum(w, EIG_FLOOR * lmax)
    return (v / w) @ v.T, float(lmax / w[0])


def _sym(m):
    return 0.5 * (m + m.T)


def compute_K(scale1: DiagonalScale, scale2: DiagonalScale, G1, G2) -> KMatrices:
    """K1, K2, K3 from the diagonal scales and the sign Jacobians.

    ``A12 = D1^{-1/2} D2^{1/2}``, ``A21 = D2^{-1/2} D1^{1/2}``,
    ``M1 = G2 A21 G1^{-1}``, ``M2 = G2^{-1} A12 G1``, ``C12 = M2 M1``;
    ``K1 = sym(M1)``, ``K2 = sym(M2)``, ``K3 = I + C12^T``.
    """
    d1 = np.asarray(getattr(scale1, "d", scale1), dtype=float)
    d2 = np.asarray(getattr(scale2, "d", scale2), dtype=float)
    G1 = np.asarray(G1, dtype=float)
    G2 = np.asarray(G2, dtype=float)
    a12 = np.sqrt(d2) / np.sqrt(d1)
    a21 = np.sqrt(d1) / np.sqrt(d2)
    g1inv, cond1 = _floored_inverse(G1, "G1")
    g2inv, cond2 = _floored_inverse(G2, "G2")
    m1 = (G2 * a21) @ g1inv
    m2 = (g2inv * a12) @ G1
    c12 = m2 @ m1
    k3 = np.eye(len(d1)) + c12.T
    return KMatrices(_sym(m1), _sym(m2), k3, cond1, cond2)


def cross_signs(x, scale: DiagonalScale, center, zero_guard=0.0):
    """``U{D^{-1/2}(x_i - center)}`` for every row of ``x``."""
    y = (np.asarray(x, dtype=float) - center) / np.sqrt(scale.d)
    return spatial_signs(y, zero_guard)[0]


def diagonal_correction(S1, S2, K: KMatrices) -> float:
    """``sum_k n_k^{-2} sum_i S_ki^T K_k S_ki``."""
    n1, n2 = len(S1), len(S2)
    q1 = np.sum((S1 @ K.K1) * S1)
    q2 = np.sum((S2 @ K.K2) * S2)
    return float(q1 / n1**2 + q2 / n2**2)


def compute_statistic(sample1, sample2, scale1: DiagonalScale, scale2: DiagonalScale,
                      fit1: SpatialFit, fit2: SpatialFit, K: KMatrices) -> TestStatistic:
    """``T = R_hat - b_hat``.

    ``R_hat`` pairs the signs of each sample centred at the *other*
    sample's spatial median, through the two sign sums; ``b_hat`` uses
    the within-sample fitted signs.
    """
    x1 = np.asarray(sample1, dtype=float)
    x2 = np.asarray(sample2, dtype=float)
    a1 = cross_signs(x1, scale1, fit2.theta_hat, fit1.zero_guard)
    a2 = cross_signs(x2, scale2, fit1.theta_hat, fit2.zero_guard)
    r_hat = -float(a1.sum(axis=0) @ a2.sum(axis=0)) / (len(x1) * len(x2))
    b_hat = diagonal_correction(fit1.signs, fit2.signs, K)
    return TestStatistic(r_hat, b_hat, r_hat - b_hat)


def psd_sqrt(m, name="Omega"):
    w, v = np.linalg.eigh(_sym(np.asarray(m, dtype=float)))
    if w[0] < -1e-8:
        raise SingularOmega(f"{name} has eigenvalue {w[0]:.3g}")
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T
    return _sym(root)


def oracle_null(Omega1, Omega2, K: KMatrices, n1: int, n2: int) -> OracleNull:
    """Block matrix ``B_n``, its spectrum, ``tau_n`` and the row-leverage ``Delta_row``."""
    r1 = psd_sqrt(Omega1, "Omega1")
    r2 = psd_sqrt(Omega2, "Omega2")
    b11 = r1 @ K.K1 @ r1 / n1
    b22 = r2 @ K.K2 @ r2 / n2
    b12 = -(r1 @ K.K3 @ r2) / (2 * np.sqrt(n1 * n2))
    B = _sym(np.block([[b11, b12], [b12.T, b22]]))
    lam = np.linalg.eigvalsh(B)
    tau = float(np.sqrt(2 * np.sum(lam**2)))
    op = lambda m: np.linalg.norm(m, 2)  # noqa: E731
    O1, O2 = np.asarray(Omega1, float), np.asarray(Omega2, float)
    delta = max(
        op(K.K1 @ O1 @ K.K1) / n1**3,
        op(K.K2 @ O2 @ K.K2) / n2**3,
        op(K.K3 @ O2 @ K.K3.T) / (n1**2 * n2),
        op(K.K3.T @ O1 @ K.K3) / (n1 * n2**2),
    ) / tau**2
    return OracleNull(B, lam, tau, float(delta))


def oracle_mean(Omega1, Omega2, K: KMatrices, n1, n2) -> float:
    """``b_n = tr(K1 Omega1)/n1 + tr(K2 Omega2)/n2``."""
    return float(np.trace(K.K1 @ Omega1) / n1 + np.trace(K.K2 @ Omega2) / n2)


def oracle_U_variance(Omega1, Omega2, K: KMatrices, n1, n2) -> float:
    """Exact variance of the diagonal-deleted oracle statistic."""
    r1, r2 = psd_sqrt(Omega1), psd_sqrt(Omega2)
    c1 = r1 @ K.K1 @ r1
    c2 = r2 @ K.K2 @ r2
    return float(
        2 * (n1 - 1) / n1**3 * np.sum(c1 * c1)
        + 2 * (n2 - 1) / n2**3 * np.sum(c2 * c2)
        + np.trace(Omega1 @ K.K3 @ Omega2 @ K.K3.T) / (n1 * n2)
    )


def sample_gamma(oracle: OracleNull, draws: int, rng=None, batch: int = 10_000) -> np.ndarray:
    """Draws of ``sum_r lambda_r (chi2_1r - 1)``."""
    if draws < 1:
        raise ValueError("draws must be >= 1")
    rng = as_generator(rng)
    lam = oracle.eigenvalues
    out = np.empty(draws)
    for start in range(0, draws, batch):
        m = min(batch, draws - start)
        z = rng.standard_normal((m, lam.size))
        out[start:start + m] = (z * z - 1.0) @ lam
    return out


def oracle_U_statistic(S1, S2, K: KMatrices) -> float:
    """Diagonal-deleted quadratic statistic ``U_n`` of given sign rows."""
    S1 = np.asarray(S1, dtype=float)
    S2 = np.asarray(S2, dtype=float)
    n1, n2 = len(S1), len(S2)
    s1, s2 = S1.sum(axis=0), S2.sum(axis=0)
    w1 = s1 @ K.K1 @ s1 - np.sum((S1 @ K.K1) * S1)
    w2 = s2 @ K.K2 @ s2 - np.sum((S2 @ K.K2) * S2)
    return float(w1 / n1**2 + w2 / n2**2 - s1 @ K.K3 @ s2 / (n1 * n2))


def oracle_U_batch(S1, S2, K: KMatrices) -> np.ndarray:
    """Vectorised :func:`oracle_U_statistic` over a leading replication axis."""
    n1, n2 = S1.shape[1], S2.shape[1]
    s1, s2 = S1.sum(axis=1), S2.sum(axis=1)
    w1 = np.sum((s1 @ K.K1) * s1, axis=1) - np.sum((S1 @ K.K1) * S1, axis=(1, 2))
    w2 = np.sum((s2 @ K.K2) * s2, axis=1) - np.sum((S2 @ K.K2) * S2, axis=(1, 2))
    cross = np.sum((s1 @ K.K3) * s2, axis=1)
    return w1 / n1**2 + w2 / n2**2 - cross / (n1 * n2)
