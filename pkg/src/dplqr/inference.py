"""Asymptotic covariance of the linear coefficients and Wald intervals.

Under homoscedastic errors the asymptotic covariance of
sqrt(n) * (theta_hat - theta) is

    Sigma = tau * (1 - tau) * Omega^{-1} / f(0)^2

where f(0) is the residual density at zero and Omega is the covariance of
V = X - E(X | Z). Both pieces are estimated from the fitted model: f(0)
by a Gaussian kernel density estimate on the residuals, and E(X | Z) by a
least-squares network regression of each X-coordinate on Z using the same
architecture and training machinery as the main fit.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .densemath import sample_iqr, sample_sd, sym_inverse
from .errors import ConfigError, DataError, SingularMatrixError
from .model import residuals as model_residuals
from .network import forward_batch
from .optimizer import train_joint
from .rng import split


def kde_at_zero(res):
    """Gaussian kernel density estimate of the residual density at 0.

    Bandwidth is Silverman's rule of thumb:
    h = 0.9 * min(sd, IQR/1.34) * n^(-1/5), falling back to the sd alone
    when the IQR is 0. Needs at least 10 residuals; all-identical
    residuals make the bandwidth degenerate and raise.
    """
    res = np.asarray(res, dtype=float)
    if res.ndim != 1 or res.size < 10:
        raise DataError(
            f"kde_at_zero needs at least 10 residuals, got {res.size}")
    if not np.all(np.isfinite(res)):
        raise DataError("kde_at_zero: residuals must be finite")
    sd = sample_sd(res)
    iqr = sample_iqr(res)
    spread = sd if iqr == 0.0 else min(sd, iqr / 1.34)
    if spread == 0.0:
        raise DataError(
            "kde_at_zero: residuals are all identical; bandwidth degenerate")
    h = 0.9 * spread * res.size ** (-0.2)
    scaled = res / h
    return float(np.mean(np.exp(-0.5 * scaled ** 2)) / (h * np.sqrt(2.0 * np.pi)))


def fit_projection(data, k, config, rng):
    """Least-squares network regression of X_k on Z.

    Reuses the main fit's architecture and Adam machinery with squared
    error instead of check loss. Returns the fitted NetworkParams; its
    predictions (forward_batch) estimate E(X_k | Z).
    """
    if data.q < 1:
        raise DataError("projection fits need at least one z column")
    if not 0 <= k < data.p:
        raise DataError(f"coefficient index {k} out of range for p={data.p}")
    widths = (data.q,) + (config.width,) * (config.depth - 1) + (1,)
    _, params, _ = train_joint(
        data.x[:, k], np.zeros((data.n, 0)), data.z, widths, config, rng,
        tau=None)
    return params


@dataclass
class CovarianceEstimate:
    """f0_hat, Omega, Sigma, and per-coefficient Wald intervals."""

    f0_hat: float
    omega_hat: np.ndarray
    sigma_hat: np.ndarray
    level: float
    intervals: np.ndarray


def confidence_intervals(theta_hat, sigma_hat, n, level):
    """Wald intervals theta_k +/- z_{(1+level)/2} * sqrt(Sigma_kk / n)."""
    if not 0.0 < level < 1.0:
        raise ConfigError(f"level must be in (0, 1), got {level}")
    theta_hat = np.asarray(theta_hat, dtype=float)
    sigma_hat = np.asarray(sigma_hat, dtype=float)
    diag = np.diag(sigma_hat)
    if np.any(diag < 0):
        raise DataError("covariance has a negative diagonal entry")
    z = float(ndtri(0.5 + level / 2.0))
    half = z * np.sqrt(diag / n)
    return np.column_stack([theta_hat - half, theta_hat + half])


def covariance(fit, data, config, rng, level=0.95):
    """Estimate the asymptotic covariance of theta_hat and its intervals.

    Pipeline: residuals -> f0_hat by kde_at_zero; per-coefficient
    projection fits -> V_i = X_i - proj(Z_i); Omega = centered sample
    covariance of V with the n-1 denominator; Sigma = tau*(1-tau) *
    Omega^{-1} / f0_hat^2. The rng is split once per coefficient so
    projection fits have independent, reproducible streams.
    """
    if fit.mode == "dnqr":
        raise ConfigError("dnqr fits have no linear coefficients to cover")
    if data.p < 1 or data.q < 1:
        raise DataError("covariance needs p >= 1 and q >= 1")
    res = model_residuals(fit, data)
    f0 = kde_at_zero(res)

    children = split(rng, data.p)
    v = np.empty((data.n, data.p))
    for k in range(data.p):
        proj = fit_projection(data, k, config, children[k])
        v[:, k] = data.x[:, k] - forward_batch(proj, data.z)

    centered = v - v.mean(axis=0)
    omega = centered.T @ centered / (data.n - 1)
    try:
        omega_inv = sym_inverse(omega)
    except SingularMatrixError as exc:
        worst = int(np.argmin(np.diag(omega)))
        raise SingularMatrixError(
            f"projection residual covariance is singular; coefficient"
            f" {worst} has variance {omega[worst, worst]:.3e} after"
            f" projecting on z") from exc
    sigma = fit.tau * (1.0 - fit.tau) * omega_inv / f0 ** 2
    intervals = confidence_intervals(fit.theta_hat, sigma, data.n, level)
    return CovarianceEstimate(f0, omega, sigma, float(level), intervals)
