"""Partially linear quantile regression.

The model is

    quantile_tau(Y | X=x, Z=z) = x @ theta + m(z)

with theta estimated jointly with a ReLU-network m by minimizing the
empirical check loss. Two degenerate modes reuse the same machinery:
"lqr" replaces the network by a single affine layer (the whole model is
then linear in (x, z)), and "dnqr" drops the linear part and routes every
covariate into the network.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DataError
from .network import NetworkParams, forward_batch
from .optimizer import MODES, TrainConfig, TrainHistory, train_joint
from .quantile_loss import validate_tau
from .rng import make_rng


@dataclass
class Dataset:
    """Rows of (y, x, z): responses, linear covariates, network covariates.

    x and z may each be empty (p == 0 or q == 0) but not both. Arrays are
    coerced to float64 and must be finite.
    """

    y: np.ndarray
    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.y.ndim != 1:
            raise DataError(f"y must be 1-d, got shape {self.y.shape}")
        if not np.all(np.isfinite(self.y)):
            raise DataError("y contains non-finite values")
        self.x = self._block(self.x, self.y.shape[0], "x")
        self.z = self._block(self.z, self.y.shape[0], "z")
        if self.x.shape[1] == 0 and self.z.shape[1] == 0:
            raise DataError("x and z cannot both be empty")

    @staticmethod
    def _block(a, n, name):
        if a is None:
            a = np.zeros((n, 0))
        a = np.asarray(a, dtype=float)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2 or a.shape[0] != n:
            raise DataError(
                f"{name} must have one row per response; got shape"
                f" {a.shape} for {n} responses")
        if not np.all(np.isfinite(a)):
            raise DataError(f"{name} contains non-finite values")
        return a

    @property
    def n(self):
        return self.y.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def q(self):
        return self.z.shape[1]

    def subset(self, idx):
        idx = np.asarray(idx)
        return Dataset(self.y[idx], self.x[idx], self.z[idx])


@dataclass
class PlqrFit:
    """A fitted model: linear coefficients plus an optional network.

    x_dim and z_dim record the covariate layout of the training data, so
    prediction accepts (x, z) in the original shape even in dnqr mode,
    where the network consumes their concatenation and theta_hat is empty.
    The network is absent when there are no network covariates.
    """

    theta_hat: np.ndarray
    network: NetworkParams
    tau: float
    history: TrainHistory
    mode: str
    x_dim: int
    z_dim: int


def make_mode_config(mode, base):
    """Adapt a TrainConfig to a model mode.

    "lqr" forces depth 1 (a single affine layer, no hidden units);
    "dnqr" and "dplqr" keep the architecture and only set the mode tag.
    """
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    if mode == "lqr":
        return replace(base, depth=1, mode="lqr")
    return replace(base, mode=mode)


def _network_widths(config, q):
    if q == 0:
        return None
    return (q,) + (config.width,) * (config.depth - 1) + (1,)


def fit(data, tau, config, rng=None):
    """Fit the model at quantile level tau by minibatch Adam.

    theta starts at 0 and the network at its Glorot init; both are
    updated in every Adam step. An internal 80/20 split of `data` drives
    early stopping: training halts once validation loss has gone
    `early_stop_patience` epochs without a new minimum, and the
    parameters in effect at the halt are returned. Pass an explicit rng
    to control the randomness; otherwise one is seeded from config.seed.
    """
    if not isinstance(data, Dataset):
        raise DataError("fit expects a Dataset")
    tau = validate_tau(tau)
    config.validate(n=data.n)
    if data.n < 5:
        raise DataError(f"need at least 5 rows to fit, got {data.n}")
    if rng is None:
        rng = make_rng(config.seed)

    if config.mode == "dnqr":
        x_eff = np.zeros((data.n, 0))
        z_eff = np.hstack([data.x, data.z])
    else:
        x_eff, z_eff = data.x, data.z

    widths = _network_widths(config, z_eff.shape[1])
    theta, params, history = train_joint(
        data.y, x_eff, z_eff, widths, config, rng, tau=tau)
    return PlqrFit(theta, params, tau, history, config.mode,
                   x_dim=data.p, z_dim=data.q)


def _check_block(a, dim, n, name):
    a = np.zeros((n, 0)) if a is None else np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a.reshape(-1, 1) if dim == 1 else a.reshape(1, -1)
    if a.shape != (n, dim):
        raise DataError(
            f"{name} must have shape ({n}, {dim}), got {a.shape}")
    return a


def predict_batch(fit, x, z):
    """Predicted tau-quantiles for rows of covariates.

    x has fit.x_dim columns and z has fit.z_dim columns (either may be
    None when the corresponding dimension is 0).
    """
    if x is not None and np.ndim(x) == 2:
        n = len(x)
    elif z is not None and np.ndim(z) == 2:
        n = len(z)
    else:
        raise DataError("predict_batch needs at least one 2-d covariate block")
    x = _check_block(x, fit.x_dim, n, "x")
    z = _check_block(z, fit.z_dim, n, "z")
    if fit.mode == "dnqr":
        return forward_batch(fit.network, np.hstack([x, z]))
    out = x @ fit.theta_hat
    if fit.network is not None:
        out = out + forward_batch(fit.network, z)
    return out


def predict(fit, x, z=None):
    """Predicted tau-quantile at a single covariate point."""
    x = np.zeros(0) if x is None else np.atleast_1d(np.asarray(x, dtype=float))
    z = np.zeros(0) if z is None else np.atleast_1d(np.asarray(z, dtype=float))
    if x.shape != (fit.x_dim,):
        raise DataError(f"x must have shape ({fit.x_dim},), got {x.shape}")
    if z.shape != (fit.z_dim,):
        raise DataError(f"z must have shape ({fit.z_dim},), got {z.shape}")
    return float(predict_batch(fit, x.reshape(1, -1), z.reshape(1, -1))[0])


def residuals(fit, data):
    """y minus the fitted tau-quantile, for every row of `data`."""
    if data.p != fit.x_dim or data.q != fit.z_dim:
        raise DataError(
            f"data has (p={data.p}, q={data.q}) but the fit expects"
            f" (p={fit.x_dim}, q={fit.z_dim})")
    return data.y - predict_batch(fit, data.x, data.z)


def m_values(fit, z_matrix):
    """Network-component values on rows of z (the nonparametric part).

    For "dnqr" fits the linear/nonparametric split does not exist, so
    this raises. A fit with no network (q == 0) contributes 0.
    """
    if fit.mode == "dnqr":
        raise ConfigError("dnqr fits have no separable nonparametric part")
    z_matrix = np.asarray(z_matrix, dtype=float)
    if z_matrix.ndim != 2 or z_matrix.shape[1] != fit.z_dim:
        raise DataError(
            f"z must have {fit.z_dim} columns, got shape {z_matrix.shape}")
    if fit.network is None:
        return np.zeros(z_matrix.shape[0])
    return forward_batch(fit.network, z_matrix)
