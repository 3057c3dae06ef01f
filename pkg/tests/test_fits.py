"""Least-squares fit recovery, variances, and degenerate-input handling."""

import numpy as np
import pytest

from mbqc_lab.fits import fit_ellipse, fit_line, fit_quadratic_offset


def test_ellipse_recovers_exact_generator():
    betas = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    pts = [(np.cos(b), 0.8 * np.sin(b)) for b in betas]
    fit = fit_ellipse(pts)
    assert fit.params["a"] == pytest.approx(1.0, abs=1e-9)
    assert fit.params["b"] == pytest.approx(0.8, abs=1e-9)
    assert fit.residual_norm < 1e-9


def test_ellipse_unit_circle():
    betas = np.linspace(0, 2 * np.pi, 8, endpoint=False)
    fit = fit_ellipse([(np.cos(b), np.sin(b)) for b in betas])
    assert fit.params["a"] == pytest.approx(1.0, abs=1e-9)
    assert fit.params["b"] == pytest.approx(1.0, abs=1e-9)


def test_ellipse_needs_five_points():
    with pytest.raises(ValueError):
        fit_ellipse([(1, 0), (0, 1), (-1, 0), (0, -1)])


def test_ellipse_collinear_points_raise():
    pts = [(x, 0.0) for x in np.linspace(-1, 1, 8)]
    with pytest.raises(ValueError):
        fit_ellipse(pts)


def test_ellipse_variances_shrink_with_noise():
    rng = np.random.default_rng(0)
    betas = np.linspace(0, 2 * np.pi, 24, endpoint=False)
    noisy = [(np.cos(b) + rng.normal(0, 0.01), 0.6 * np.sin(b) + rng.normal(0, 0.01))
             for b in betas]
    fit = fit_ellipse(noisy)
    assert fit.params["a"] == pytest.approx(1.0, abs=0.05)
    assert 0 < fit.variances["a"] < 1e-3


def test_line_recovery_and_variance():
    x = np.linspace(0, 3, 10)
    fit = fit_line(x, 2.5 * x + 0.7)
    assert fit.params["slope"] == pytest.approx(2.5, abs=1e-10)
    assert fit.params["intercept"] == pytest.approx(0.7, abs=1e-10)
    assert fit.residual_norm < 1e-10


def test_weighted_line_downweights_noisy_points():
    x = np.array([0.0, 1.0, 2.0, 3.0])
    y = np.array([0.0, 1.0, 2.0, 30.0])  # outlier with a huge error bar
    fit = fit_line(x, y, y_err=[0.01, 0.01, 0.01, 100.0])
    assert fit.params["slope"] == pytest.approx(1.0, abs=1e-3)


def test_weighted_line_rejects_bad_errors():
    with pytest.raises(ValueError):
        fit_line([0, 1, 2], [0, 1, 2], y_err=[1.0, 0.0, 1.0])


def test_line_needs_three_points():
    with pytest.raises(ValueError):
        fit_line([0, 1], [0, 1])


def test_quadratic_offset_recovery():
    x = np.linspace(0, 1, 9)
    fit = fit_quadratic_offset(x, 0.3 * x ** 2 + 0.05)
    assert fit.params["curvature"] == pytest.approx(0.3, abs=1e-10)
    assert fit.params["offset"] == pytest.approx(0.05, abs=1e-10)


def test_quadratic_offset_ignores_odd_part():
    # the model has no linear term; an odd perturbation on a symmetric grid
    # leaves curvature and offset unchanged
    x = np.linspace(-1, 1, 11)
    base = 0.4 * x ** 2 + 0.1
    fit = fit_quadratic_offset(x, base + 0.2 * x)
    assert fit.params["curvature"] == pytest.approx(0.4, abs=1e-10)
    assert fit.params["offset"] == pytest.approx(0.1, abs=1e-10)


def test_quadratic_needs_four_points():
    with pytest.raises(ValueError):
        fit_quadratic_offset([0, 1, 2], [0, 1, 4])


def test_rank_deficient_design_raises():
    with pytest.raises(ValueError):
        fit_line([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])
