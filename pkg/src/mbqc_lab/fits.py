"""Least-squares fits used by the experiment runners.

All models are linear in their parameters: axis-aligned origin-centered
ellipse (linear in the inverse squared half-axes), straight line, and a
quadratic with offset and no linear term (purity loss is even in beta).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class FitResult:
    model: str
    params: dict[str, float]
    variances: dict[str, float]
    residual_norm: float
    extra: dict = field(default_factory=dict)


def _lstsq_with_cov(a: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    n_pts, n_par = a.shape
    if np.linalg.matrix_rank(a) < n_par:
        raise ValueError("rank-deficient design matrix")
    coef, res, _, _ = np.linalg.lstsq(a, y, rcond=None)
    resid = y - a @ coef
    rnorm = float(np.linalg.norm(resid))
    dof = max(n_pts - n_par, 1)
    s2 = rnorm ** 2 / dof
    cov = s2 * np.linalg.inv(a.T @ a)
    return coef, cov, rnorm


def fit_ellipse(points) -> FitResult:
    """Axis-aligned origin-centered ellipse x^2/a^2 + y^2/b^2 = 1.

    Linear least squares in u = 1/a^2, v = 1/b^2; parameter variances follow
    by the delta method a = u^{-1/2}.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] < 5:
        raise ValueError("ellipse fit needs at least 5 points")
    a_mat = np.column_stack([pts[:, 0] ** 2, pts[:, 1] ** 2])
    y = np.ones(pts.shape[0])
    coef, cov, rnorm = _lstsq_with_cov(a_mat, y)
    u, v = coef
    if u <= 0 or v <= 0:
        raise ValueError("degenerate point set: non-positive inverse axis")
    a_ax, b_ax = 1.0 / np.sqrt(u), 1.0 / np.sqrt(v)
    var_a = cov[0, 0] * (0.5 * u ** -1.5) ** 2
    var_b = cov[1, 1] * (0.5 * v ** -1.5) ** 2
    return FitResult("ellipse", {"a": float(a_ax), "b": float(b_ax)},
                     {"a": float(var_a), "b": float(var_b)}, rnorm)


def fit_line(x, y, y_err=None) -> FitResult:
    """Straight line; given per-point errors the fit and its covariance are
    inverse-variance weighted, otherwise ordinary least squares."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("line fit needs at least 3 points")
    a_mat = np.column_stack([x, np.ones_like(x)])
    if y_err is None:
        coef, cov, rnorm = _lstsq_with_cov(a_mat, y)
    else:
        errs = np.asarray(y_err, dtype=float)
        if not (np.all(np.isfinite(errs)) and np.all(errs > 0)):
            raise ValueError("y_err entries must be positive and finite")
        w = 1.0 / errs
        coef, _, _ = _lstsq_with_cov(a_mat * w[:, None], y * w)
        cov = np.linalg.inv((a_mat * w[:, None] ** 2).T @ a_mat)
        rnorm = float(np.linalg.norm(y - a_mat @ coef))
    return FitResult("line", {"slope": float(coef[0]), "intercept": float(coef[1])},
                     {"slope": float(cov[0, 0]), "intercept": float(cov[1, 1])}, rnorm)


def fit_quadratic_offset(x, y, y_err=None) -> FitResult:
    """y = c x^2 + d; no linear term. Optional per-point errors weight the fit."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 4:
        raise ValueError("quadratic fit needs at least 4 points")
    a_mat = np.column_stack([x ** 2, np.ones_like(x)])
    if y_err is None:
        coef, cov, rnorm = _lstsq_with_cov(a_mat, y)
    else:
        errs = np.asarray(y_err, dtype=float)
        if not (np.all(np.isfinite(errs)) and np.all(errs > 0)):
            raise ValueError("y_err entries must be positive and finite")
        w = 1.0 / errs
        coef, _, _ = _lstsq_with_cov(a_mat * w[:, None], y * w)
        cov = np.linalg.inv((a_mat * w[:, None] ** 2).T @ a_mat)
        rnorm = float(np.linalg.norm(y - a_mat @ coef))
    return FitResult("quadratic_offset",
                     {"curvature": float(coef[0]), "offset": float(coef[1])},
                     {"curvature": float(cov[0, 0]), "offset": float(cov[1, 1])}, rnorm)
