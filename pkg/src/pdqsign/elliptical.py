"""Elliptical data generators and Monte Carlo population oracles.

Observations follow ``X = theta + D0^{1/2} R^{1/2} xi u`` with ``u``
uniform on the sphere and ``xi`` an unnormalised radial variable. All
three radial laws used here are scale mixtures of a Gaussian core, so
``xi u`` is drawn as ``c * Z`` with ``Z ~ N(0, I_p)`` and ``c`` an
independent positive factor (1, ``(W/nu)^{-1/2}``, or ``s`` with
probability ``1 - gamma``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg, stats

from .errors import InputError, InvalidDimension, InvalidRho, NotPositiveDefinite
from .rng import as_generator

_BATCH = 20_000


@dataclass(frozen=True)
class ShapeSpec:
    """Correlation (shape) matrix family: ``ar1``, ``cs`` or ``explicit``."""

    kind: str
    rho: float = 0.0
    matrix: np.ndarray | None = field(default=None, compare=False, repr=False)

    @classmethod
    def ar1(cls, rho):
        return cls("ar1", float(rho))

    @classmethod
    def cs(cls, rho):
        return cls("cs", float(rho))

    @classmethod
    def explicit(cls, matrix):
        return cls("explicit", 0.0, np.array(matrix, dtype=float))

    def __post_init__(self):
        if self.kind == "ar1" and not abs(self.rho) < 1:
            raise InvalidRho(f"AR(1) needs |rho| < 1, got {self.rho}")
        if self.kind == "cs" and not 0 <= self.rho < 1:
            raise InvalidRho(f"compound symmetry needs 0 <= rho < 1, got {self.rho}")
        if self.kind == "explicit" and self.matrix is None:
            raise InvalidRho("explicit shape needs a matrix")
        if self.kind not in ("ar1", "cs", "explicit"):
            raise InvalidRho(f"unknown shape kind {self.kind!r}")


@dataclass(frozen=True)
class RadialSpec:
    """Radial law: ``normal``, ``t`` (``nu`` d.f.) or ``mixnormal`` (``gamma``, ``s``)."""

    kind: str = "normal"
    nu: float = 3.0
    gamma: float = 0.8
    s: float = 3.0

    @classmethod
    def normal(cls):
        return cls("normal")

    @classmethod
    def student_t(cls, nu=3.0):
        return cls("t", nu=float(nu))

    @classmethod
    def mixture(cls, gamma=0.8, s=3.0):
        return cls("mixnormal", gamma=float(gamma), s=float(s))

    def __post_init__(self):
        if self.kind == "t" and not self.nu > 0:
            raise ValueError(f"t radial law needs nu > 0, got {self.nu}")
        if self.kind == "mixnormal" and not (0 < self.gamma < 1 and self.s > 1):
            raise ValueError("mixture needs 0 < gamma < 1 and s > 1")
        if self.kind not in ("normal", "t", "mixnormal"):
            raise ValueError(f"unknown radial kind {self.kind!r}")

    def factors(self, n, rng):
        """Independent positive multipliers ``c`` with ``xi u = c Z``."""
        if self.kind == "normal":
            return np.ones(n)
        if self.kind == "t":
            return 1.0 / np.sqrt(rng.chisquare(self.nu, size=n) / self.nu)
        contaminated = rng.random(n) >= self.gamma
        return np.where(contaminated, self.s, 1.0)


@dataclass(frozen=True)
class PopulationSpec:
    p: int
    shape: ShapeSpec
    radial: RadialSpec = RadialSpec()
    theta: np.ndarray | None = field(default=None, compare=False)
    d0: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.p < 2:
            raise InvalidDimension(f"spatial signs need p >= 2, got {self.p}")
        if self.d0 is not None and np.any(np.asarray(self.d0) <= 0):
            raise ValueError("diagonal scales d0 must be positive")


def as_sample(x, name="sample"):
    """Validate an n x p observation block (n >= 2, p >= 2, finite)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise InvalidDimension(f"{name} must be a 2-d array, got shape {x.shape}")
    n, p = x.shape
    if p < 2:
        raise InvalidDimension(f"{name}: spatial signs need p >= 2, got p={p}")
    if n < 2:
        raise InvalidDimension(f"{name}: need at least 2 observations, got {n}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} contains non-finite entries")
    return x


def make_shape(spec: ShapeSpec, p: int) -> np.ndarray:
    """Correlation matrix of the given family in dimension ``p``."""
    if p < 2:
        raise InvalidDimension(f"need p >= 2, got {p}")
    if spec.kind == "ar1":
        idx = np.arange(p)
        return spec.rho ** np.abs(idx[:, None] - idx[None, :]).astype(float)
    if spec.kind == "cs":
        r = np.full((p, p), spec.rho)
        np.fill_diagonal(r, 1.0)
        return r
    m = np.array(spec.matrix, dtype=float)
    if m.shape != (p, p):
        raise InvalidDimension(f"explicit shape is {m.shape}, expected {(p, p)}")
    if not np.array_equal(m, m.T):
        raise NotPositiveDefinite("explicit shape matrix is not symmetric")
    if not np.allclose(np.diag(m), 1.0):
        raise NotPositiveDefinite("explicit shape matrix must have unit diagonal")
    try:
        linalg.cholesky(m, lower=True)
    except linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    return m


@lru_cache(maxsize=32)
def _sym_root_cached(kind, rho, p):
    return _sym_root(make_shape(ShapeSpec(kind, rho), p))


def _sym_root(r):
    w, v = np.linalg.eigh(r)
    if w[0] <= 0:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3g}")
    root = (v * np.sqrt(w)) @ v.T
    return (root + root.T) / 2


def apply_shape_root(spec: ShapeSpec, z: np.ndarray) -> np.ndarray:
    """Rows of ``z`` mapped through the symmetric root ``R^{1/2}``."""
    p = z.shape[1]
    if spec.kind == "cs":
        # R^{1/2} = a I + b 11^T, applied in O(np)
        a = np.sqrt(1 - spec.rho)
        b = (np.sqrt(1 + (p - 1) * spec.rho) - a) / p
        return a * z + b * z.sum(axis=1, keepdims=True)
    if spec.kind == "ar1":
        root = _sym_root_cached("ar1", spec.rho, p)
    else:
        root = _sym_root(make_shape(spec, p))
    return z @ root


def sample_population(spec: PopulationSpec, n: int, rng) -> np.ndarray:
    """Draw ``n`` i.i.d. rows from the elliptical population."""
    if n < 2:
        raise InvalidDimension(f"need n >= 2, got {n}")
    rng = as_generator(rng)
    p = spec.p
    z = rng.standard_normal((n, p))
    c = spec.radial.factors(n, rng)
    x = apply_shape_root(spec.shape, z) * c[:, None]
    if spec.d0 is not None:
        x *= np.sqrt(np.asarray(spec.d0, dtype=float))
    if spec.theta is not None:
        x += np.asarray(spec.theta, dtype=float)
    return x


def oracle_signs(shape: ShapeSpec, p: int, n: int, rng) -> np.ndarray:
    """``n`` draws of the population sign ``U(R^{1/2} u)``."""
    rng = as_generator(rng)
    y = apply_shape_root(shape, rng.standard_normal((n, p)))
    return y / np.linalg.norm(y, axis=1, keepdims=True)


def gaussian_pdq_quantile(alpha: float) -> float:
    """Closed-form pairwise quantile for the normal radial law (difference ~ N(0, 2))."""
    return float(np.sqrt(2.0) * stats.norm.ppf((1 + alpha) / 2))


def population_pdq_quantile(radial: RadialSpec, alpha: float, p: int, mc: int = 100_000,
                            rng=None, return_se: bool = False):
    """Monte Carlo alpha-quantile of ``|xi_1 U_{1,1} - xi_2 U_{2,1}|``.

    For the Gaussian scale mixtures supported here ``xi U_1`` equals a
    standard normal times the radial factor, so ``p`` does not enter the
    draw. The standard error comes from a distribution-free order-statistic
    interval.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if mc < 10_000:
        raise ValueError("mc must be at least 10^4")
    if p < 2:
        raise InvalidDimension(f"need p >= 2, got {p}")
    rng = as_generator(rng)
    a = rng.standard_normal(mc) * radial.factors(mc, rng)
    b = rng.standard_normal(mc) * radial.factors(mc, rng)
    d = np.sort(np.abs(a - b))
    k = int(np.ceil(alpha * mc))
    q = float(d[k - 1])
    if not return_se:
        return q
    h = int(np.ceil(1.959964 * np.sqrt(mc * alpha * (1 - alpha))))
    lo, hi = d[max(k - 1 - h, 0)], d[min(k - 1 + h, mc - 1)]
    return q, float((hi - lo) / (2 * 1.959964))


def population_sign_moments(shape: ShapeSpec, p: int, mc: int = 100_000, rng=None,
                            radial: RadialSpec = RadialSpec(), q: float | None = None):
    """Monte Carlo ``(Omega, G)`` for the population signs.

    ``Omega = E S S^T`` and ``G = E ||Y||^{-1} (I - S S^T)`` with
    ``Y = q^{-1} xi R^{1/2} u``. ``q`` defaults to the radial law's
    pairwise 0.5-quantile (closed form for the normal law).
    """
    if mc < 10_000:
        raise ValueError("mc must be at least 10^4")
    rng = as_generator(rng)
    if q is None:
        if radial.kind == "normal":
            q = gaussian_pdq_quantile(0.5)
        else:
            q = population_pdq_quantile(radial, 0.5, p, max(mc, 100_000), rng)
    omega = np.zeros((p, p))
    wss = np.zeros((p, p))
    wsum = 0.0
    done = 0
    while done < mc:
        m = min(_BATCH, mc - done)
        y = apply_shape_root(shape, rng.standard_normal((m, p))) * radial.factors(m, rng)[:, None]
        norms = np.linalg.norm(y, axis=1)
        s = y / norms[:, None]
        w = q / norms
        omega += s.T @ s
        wss += (s * w[:, None]).T @ s
        wsum += w.sum()
        done += m
    omega /= mc
    g = (wsum / mc) * np.eye(p) - wss / mc
    return (omega + omega.T) / 2, (g + g.T) / 2
