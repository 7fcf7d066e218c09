# tests/test_robust_grad.py
import math

import numpy as np
import pytest

from rgd_app.errors import InvalidConfigError, InvalidInputError
from rgd_app.mest import ChiFunction, FixedPointSettings, RhoFunction, confidence_scale, locate, rescale
from rgd_app.robust_grad import (
    GradientSample,
    RobustConfig,
    RobustGradientEstimator,
    default_robust_config,
    robust_gradient,
    robust_gradient_known_variance,
    robust_gradient_subset,
    robust_risk,
)

QUADRATIC = RobustConfig(rho=RhoFunction('quadratic_test_only'))


def test_gradient_sample_validation():
    assert GradientSample(np.ones(4)).d == 1
    with pytest.raises(InvalidInputError):
        GradientSample(np.empty((0, 3)))
    with pytest.raises(InvalidInputError):
        GradientSample(np.array([[1.0, np.inf]]))


def test_robust_config_validation():
    with pytest.raises(InvalidConfigError):
        RobustConfig(delta=0.0)
    with pytest.raises(InvalidConfigError):
        RobustConfig(C=-1.0)
    with pytest.raises(InvalidConfigError):
        RobustConfig(coordinate_subset_size=0)
    with pytest.raises(InvalidConfigError):
        RobustConfig(known_variance=[1.0, -2.0])
    with pytest.raises(InvalidConfigError):
        RobustConfig(coordinate_subset_size=5).check_dimension(3)
    assert RobustConfig().variant == 'full'
    assert RobustConfig(coordinate_subset_size=2).variant == 'subset'
    assert RobustConfig(known_variance=[1.0]).variant == 'known_variance'


def test_default_config_reads_application_settings(app_config):
    cfg = default_robust_config(app_config, delta=0.05)
    assert cfg.rho.kind == app_config['estimation']['rho']
    assert cfg.delta == 0.05
    assert cfg.fp.max_iters == app_config['fixed_point']['max_iters']
    assert cfg.pivot == app_config['estimation']['pivot']


def test_quadratic_rho_gives_column_means(rng):
    rows = rng.normal(size=(60, 5)) * np.array([1.0, 10.0, 0.1, 3.0, 100.0])
    assert np.allclose(robust_gradient(rows, QUADRATIC), rows.mean(axis=0), rtol=0, atol=1e-10)


@pytest.mark.parametrize('pivot', ['median', 'mean'])
def test_each_coordinate_follows_the_scalar_pipeline(rng, pivot):
    rows = rng.standard_t(2.2, size=(80, 3))
    cfg = RobustConfig(delta=0.01, pivot=pivot)
    estimate = robust_gradient(rows, cfg)
    for j in range(3):
        column = rows[:, j]
        center = float(np.median(column)) if pivot == 'median' else float(column.mean())
        sigma = rescale(column, center, cfg.chi, cfg.fp)
        s = confidence_scale(sigma, column.size, cfg.delta)
        assert estimate[j] == pytest.approx(locate(column, s, cfg.rho, cfg.fp), abs=1e-6)


def test_single_outlier_is_damped_through_full_pipeline(rng):
    inliers = rng.normal(size=99)
    cfg = RobustConfig()
    small = robust_gradient(np.append(inliers, 1e3), cfg)[0]
    large = robust_gradient(np.append(inliers, 1e6), cfg)[0]
    assert abs(large) <= 2.0 * abs(small) + 1e-12
    assert large == pytest.approx(small, abs=1e-4)
    assert abs(large - np.median(inliers)) < 0.5
    assert np.append(inliers, 1e6).mean() > 9e3


def test_outlier_against_zeros_stays_bounded():
    cfg = RobustConfig()
    estimates = [robust_gradient(np.append(np.zeros(99), m), cfg)[0] for m in (1e3, 1e6)]
    assert all(0.0 <= theta <= 1e-9 for theta in estimates)
    assert estimates[1] <= 2.0 * estimates[0] + 1e-15


def test_mean_pivot_scale_follows_outlier():
    cfg = RobustConfig(pivot='mean')
    small = robust_gradient(np.append(np.zeros(99), 1e3), cfg)[0]
    large = robust_gradient(np.append(np.zeros(99), 1e6), cfg)[0]
    assert large == pytest.approx(1e3 * small, rel=1e-3)


def test_subset_variant_uses_means_outside_subset(rng):
    rows = rng.standard_t(2.5, size=(40, 10))
    cfg = RobustConfig(coordinate_subset_size=3)
    estimate = robust_gradient_subset(rows, cfg, np.random.default_rng(1))
    columns = np.sort(np.random.default_rng(1).choice(10, size=3, replace=False))
    means = rows.mean(axis=0)
    untouched = np.setdiff1d(np.arange(10), columns)
    assert np.allclose(estimate[untouched], means[untouched])
    assert np.allclose(estimate[columns], robust_gradient(rows[:, columns], cfg))


def test_subset_variant_requires_size():
    with pytest.raises(InvalidConfigError):
        robust_gradient_subset(np.ones((5, 2)), RobustConfig(), np.random.default_rng(0))


def test_known_variance_variant_scale(rng):
    rows = rng.normal(size=(100, 2))
    variance = np.array([1.0, 4.0])
    cfg = RobustConfig(known_variance=variance, C=2.0, delta=0.05)
    estimate = robust_gradient_known_variance(rows, cfg)
    for j in range(2):
        s = math.sqrt(2.0 * variance[j]) * math.sqrt(100 / math.log(2 / 0.05))
        assert estimate[j] == pytest.approx(locate(rows[:, j], s, cfg.rho, cfg.fp), abs=1e-6)
    with pytest.raises(InvalidConfigError):
        robust_gradient_known_variance(rows, RobustConfig(known_variance=[1.0, 2.0, 3.0]))


def test_robust_risk_quadratic_is_mean():
    losses = np.array([0.5, 1.5, 4.0, 2.0])
    assert robust_risk(losses, QUADRATIC) == pytest.approx(losses.mean(), abs=1e-12)
    assert robust_risk(np.append(losses, 1e5), RobustConfig()) < 1e3


def test_robust_risk_lies_between_bulk_and_mean():
    losses = np.array([1.0, 1.0, 1.0, 1.0, 50.0])
    assert 1.0 < robust_risk(losses, RobustConfig(pivot='mean')) < 10.8
    assert 1.0 <= robust_risk(losses, RobustConfig()) < 10.8


def test_estimator_refreshes_scale_on_schedule(rng):
    cfg = RobustConfig(scale_refresh_every=3)
    estimator = RobustGradientEstimator(cfg, d=2, rng=rng)
    first = rng.normal(size=(50, 2))
    estimator.estimate(first)
    cached = estimator._sigma_cache.copy()
    estimator.estimate(first * 10.0)
    assert np.array_equal(estimator._sigma_cache, cached)
    estimator.estimate(first * 10.0)
    assert np.array_equal(estimator._sigma_cache, cached)
    estimator.estimate(first * 10.0)
    assert np.allclose(estimator._sigma_cache, cached * 10.0, rtol=1e-6)
    assert estimator.diagnostics.steps == 4


def test_estimator_matches_stateless_function(rng):
    rows = rng.lognormal(0.0, 1.5, size=(70, 4))
    estimator = RobustGradientEstimator(RobustConfig(), d=4, rng=rng)
    assert np.allclose(estimator.estimate(rows), robust_gradient(rows, RobustConfig()))
    with pytest.raises(InvalidInputError):
        estimator.estimate(rows[:, :3])


def test_estimator_known_variance_hook(rng):
    estimator = RobustGradientEstimator(RobustConfig(known_variance=[1.0, 1.0]), d=2, rng=rng)
    rows = rng.normal(size=(30, 2))
    estimator.set_known_variance([2.0, 8.0])
    expected = robust_gradient_known_variance(rows, RobustConfig(known_variance=[2.0, 8.0]))
    assert np.allclose(estimator.estimate(rows), expected)


def test_chi_default_is_geman():
    assert RobustConfig().chi == ChiFunction('geman_quadratic')


def test_pivot_validation_and_default():
    assert RobustConfig().pivot == 'median'
    with pytest.raises(InvalidConfigError):
        RobustConfig(pivot='mode')


def test_identical_rows_return_the_row():
    v = np.array([0.25, -3.0, 7.5])
    assert np.array_equal(robust_gradient(np.tile(v, (20, 1)), RobustConfig()), v)
    assert np.array_equal(robust_gradient(np.tile(v, (20, 1)), RobustConfig(pivot='mean')), v)


def test_row_and_column_permutations(rng):
    rows = rng.standard_t(2.5, size=(50, 6))
    cfg = RobustConfig()
    base = robust_gradient(rows, cfg)
    assert np.allclose(robust_gradient(rows[rng.permutation(50)], cfg), base, rtol=0, atol=1e-6)
    order = rng.permutation(6)
    assert np.allclose(robust_gradient(rows[:, order], cfg), base[order], rtol=0, atol=1e-9)


def test_smaller_delta_moves_estimate_away_from_mean(rng):
    column = np.concatenate([rng.normal(size=195), np.full(5, 40.0)])
    mean = column.mean()
    deltas = [0.5, 0.1, 0.01, 1e-4, 1e-6]
    gaps = [abs(robust_gradient(column, RobustConfig(delta=d))[0] - mean) for d in deltas]
    assert np.all(np.diff(gaps) >= -1e-9)
    assert gaps[-1] > gaps[0]
