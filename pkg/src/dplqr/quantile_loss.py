"""Check (pinball) loss: the objective kernel of quantile regression.

For quantile level tau in (0, 1),

    rho_tau(t) = t * (tau - 1{t < 0})

is nonnegative, equals tau*t for t >= 0 and (tau-1)*t for t < 0, and its
population minimizer over a constant predictor is the tau-quantile.
"""

import numpy as np

from .errors import ConfigError, DataError


def validate_tau(tau):
    """Return tau as a float, requiring 0 < tau < 1."""
    t = float(tau)
    if not 0.0 < t < 1.0 or not np.isfinite(t):
        raise ConfigError(f"tau must lie strictly inside (0, 1), got {tau!r}")
    return t


def check_loss(t, tau):
    """rho_tau(t); vectorized over t."""
    tau = validate_tau(tau)
    t = np.asarray(t, dtype=float)
    out = t * (tau - (t < 0.0))
    return float(out) if out.ndim == 0 else out


def loss_subgrad_wrt_pred(residual, tau):
    """Subgradient of rho_tau(y - yhat) with respect to yhat.

    Equals -(tau - 1{residual < 0}); the indicator is strict, so a zero
    residual yields -tau. Vectorized over residual.
    """
    tau = validate_tau(tau)
    r = np.asarray(residual, dtype=float)
    out = (r < 0.0) - tau
    return float(out) if out.ndim == 0 else out


def mean_check_loss(residuals, tau):
    """Average check loss of a residual vector."""
    r = np.asarray(residuals, dtype=float)
    if r.size == 0:
        raise DataError("mean_check_loss of an empty residual vector")
    return float(np.mean(check_loss(r, tau)))
