import numpy as np
import pytest

from oracles import median_grid, unit
from pdqsign.elliptical import PopulationSpec, RadialSpec, ShapeSpec, sample_population
from pdqsign.errors import DegenerateFit, NotConverged
from pdqsign.pdq import DiagonalScale, estimate_diag
from pdqsign.spatial import MedianOptions, fit, geometric_median, spatial_signs


def objective(points, m):
    return float(np.sum(np.linalg.norm(points - m, axis=1)))


def test_symmetric_cross():
    pts = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    m, it, ok = geometric_median(pts)
    assert ok
    np.testing.assert_allclose(m, 0.0, atol=1e-12)


def test_translation_equivariance(rng):
    pts = rng.standard_normal((30, 5))
    c = rng.standard_normal(5) * 100
    m0 = geometric_median(pts)[0]
    m1 = geometric_median(pts + c)[0]
    np.testing.assert_allclose(m1, m0 + c, rtol=0, atol=1e-6)


@pytest.mark.parametrize("seed", range(5))
def test_matches_grid_search(seed):
    pts = np.random.default_rng(seed).uniform(-1, 1, size=(5, 2))
    m = geometric_median(pts)[0]
    g, h = median_grid(pts, -1.0, 1.0)
    assert np.max(np.abs(m - g)) <= 2 * h
    assert objective(pts, m) <= objective(pts, g) + 1e-12


def test_anchor_at_data_point():
    # the middle point carries more than half the weight: the median is that point
    pts = np.array([[0.0, 0.0]] * 3 + [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.5]])
    m, it, ok = geometric_median(pts)
    assert ok
    np.testing.assert_allclose(m, 0.0, atol=1e-9)


def test_objective_monotone(rng):
    pts = sample_population(PopulationSpec(10, ShapeSpec.ar1(0.9), RadialSpec.student_t(3)), 40, rng)
    m, it, ok, trace = geometric_median(pts, track_objective=True)
    trace = np.asarray(trace)
    assert len(trace) >= 2
    assert np.all(np.diff(trace) <= 1e-12 * trace[0])


def test_not_converged_carries_iterate(rng):
    pts = rng.standard_normal((20, 3)) + 5
    with pytest.raises(NotConverged) as info:
        geometric_median(pts, MedianOptions(tol=1e-15, max_iter=1))
    assert info.value.last_iterate.shape == (3,)
    assert info.value.iterations == 1


def test_coincident_points():
    with pytest.raises(DegenerateFit):
        geometric_median(np.ones((4, 3)))


def test_options_validation():
    with pytest.raises(ValueError):
        MedianOptions(tol=0.0)
    with pytest.raises(ValueError):
        MedianOptions(max_iter=0)


def test_spatial_signs_zero_convention():
    y = np.array([[3.0, 4.0], [0.0, 0.0], [1e-20, 0.0]])
    s, norms, zero = spatial_signs(y, zero_guard=1e-15)
    np.testing.assert_allclose(s[0], [0.6, 0.8])
    assert np.array_equal(s[1:], np.zeros((2, 2)))
    assert zero.tolist() == [False, True, True]


def _sample(rng, n=60, p=8):
    spec = PopulationSpec(p, ShapeSpec.ar1(0.6), RadialSpec.student_t(3), d0=np.linspace(0.5, 3, p))
    return sample_population(spec, n, rng)


def test_reflection_symmetric_sample(rng):
    theta0 = np.array([1.0, -2.0, 0.5, 3.0])
    half = rng.standard_normal((15, 4)) * [1, 2, 3, 0.5]
    x = np.vstack([theta0 + half, theta0 - half])
    f = fit(x, estimate_diag(x))
    np.testing.assert_allclose(f.theta_hat, theta0, atol=1e-7)


def test_fit_outputs(rng):
    x = _sample(rng)
    f = fit(x, estimate_diag(x))
    assert f.converged and f.n_zero == 0
    np.testing.assert_allclose(np.linalg.norm(f.signs, axis=1), 1.0, atol=1e-14)
    assert abs(np.trace(f.omega_hat) - 1.0) < 1e-12
    assert np.array_equal(f.g_hat, f.g_hat.T)
    w = np.linalg.eigvalsh(f.g_hat)
    assert w[0] >= -1e-10 * w[-1]


def test_first_order_condition(rng):
    x = _sample(rng)
    scale = estimate_diag(x)
    opts = MedianOptions()
    f = fit(x, scale, opts)
    grad = sum(unit((row - f.theta_hat) / np.sqrt(scale.d)) for row in x)
    assert np.linalg.norm(grad) <= len(x) * opts.tol * 10


def test_scale_invariance(rng):
    x = _sample(rng)
    s = estimate_diag(x)
    f1 = fit(x, s)
    f4 = fit(x, s.scaled(4.0))
    assert np.array_equal(f4.theta_hat, f1.theta_hat)
    assert np.array_equal(f4.signs, f1.signs)
    assert np.array_equal(f4.omega_hat, f1.omega_hat)
    np.testing.assert_allclose(f4.g_hat, 2.0 * f1.g_hat, rtol=1e-14)
    f3 = fit(x, s.scaled(3.0))
    np.testing.assert_allclose(f3.theta_hat, f1.theta_hat, rtol=0, atol=1e-7)
    np.testing.assert_allclose(f3.g_hat, np.sqrt(3.0) * f1.g_hat, rtol=1e-6)


def test_permutation_invariance(rng):
    x = _sample(rng)
    s = estimate_diag(x)
    perm = rng.permutation(len(x))
    f0, f1 = fit(x, s), fit(x[perm], s)
    np.testing.assert_allclose(f1.theta_hat, f0.theta_hat, atol=1e-7)
    np.testing.assert_allclose(f1.signs, f0.signs[perm], atol=1e-7)
    np.testing.assert_allclose(f1.g_hat, f0.g_hat, rtol=1e-6)


def test_zero_residuals_excluded_from_g():
    ring = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [0.7, 0.7],
                     [-0.7, -0.7], [0.7, -0.7], [-0.7, 0.7], [2.0, 0.0], [-2.0, 0.0]])
    x = np.vstack([ring, [[0.0, 0.0]]])
    f = fit(x, DiagonalScale(np.ones(2), 0.5))
    assert f.n_zero == 1
    assert np.array_equal(f.signs[-1], [0.0, 0.0])
    live = f.signs[:-1]
    w = 1.0 / f.resid_norms[:-1]
    g = w.mean() * np.eye(2) - (live * w[:, None]).T @ live / 10
    np.testing.assert_allclose(f.g_hat, g, rtol=1e-12)


def test_too_many_zero_residuals():
    ring = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [0.5, 0.5], [-0.5, -0.5]])
    x = np.vstack([ring, np.zeros((2, 2))])
    with pytest.raises(DegenerateFit):
        fit(x, DiagonalScale(np.ones(2), 0.5))
