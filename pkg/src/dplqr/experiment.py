"""Replicated benchmark experiments.

Each replicate draws a fresh dataset from a DgpSpec, splits it 80/20
into train/test, tunes and fits every requested method on the training
part, and scores:

  - theta_hat and (optionally) Wald interval coverage of the true
    coefficients,
  - relative mean squared error of the fitted z-function against the
    true one on the test covariates,
  - mean squared prediction error on the test rows.

Aggregation over replicates gives per-method bias, SD, coverage, mean
RMSE, and mean MSPE. Everything is a pure function of (spec, settings,
master seed): replicate r uses the substream child_rng(master_seed, r),
and methods inside a replicate use streams split from it in a fixed
order, so adding or dropping a method never perturbs the others.
"""

import csv
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dgp import generate, mspe, rmse_m, true_m, true_theta
from .errors import ConfigError, DplqrError, TrainingError
from .inference import covariance
from .model import fit, m_values, make_mode_config, predict_batch
from .optimizer import MODES, TrainConfig, tune
from .rng import child_rng, shuffled_indices, split

# selected hyperparameters per (base case, sample size); cases 4-6 share
# the rows of their base case 1-3. Learning rate has two candidate values
# that the tuning step chooses between.
_SCENARIOS = {
    (1, 500): dict(depth=2, width=16, epochs=500, minibatch=64,
                   early_stop_patience=50, lrs=(0.01, 0.02)),
    (1, 2000): dict(depth=3, width=32, epochs=500, minibatch=64,
                    early_stop_patience=50, lrs=(0.01, 0.02)),
    (2, 500): dict(depth=3, width=10, epochs=500, minibatch=64,
                   early_stop_patience=50, lrs=(0.009, 0.01)),
    (2, 2000): dict(depth=3, width=20, epochs=500, minibatch=64,
                    early_stop_patience=50, lrs=(0.009, 0.02)),
    (3, 500): dict(depth=2, width=20, epochs=600, minibatch=128,
                   early_stop_patience=100, lrs=(0.01, 0.02)),
    (3, 2000): dict(depth=3, width=32, epochs=600, minibatch=128,
                    early_stop_patience=100, lrs=(0.01, 0.02)),
}


def _scenario_row(case, n):
    base = case if case <= 3 else case - 3
    size = 500 if n <= 1000 else 2000
    return _SCENARIOS[(base, size)]


def scenario_config(case, n, seed=0):
    """Documented training configuration for a benchmark scenario.

    Uses the first of the scenario's candidate learning rates; see
    scenario_grid for the full candidate list.
    """
    row = _scenario_row(case, n)
    return TrainConfig(depth=row["depth"], width=row["width"],
                       epochs=row["epochs"], minibatch=row["minibatch"],
                       early_stop_patience=row["early_stop_patience"],
                       learning_rate=row["lrs"][0], seed=seed)


def scenario_grid(case, n, seed=0):
    """Tuning grid for a benchmark scenario (one config per learning rate)."""
    base = scenario_config(case, n, seed=seed)
    return [replace(base, learning_rate=lr)
            for lr in _scenario_row(case, n)["lrs"]]


@dataclass
class ReplicateResult:
    """Metrics of one method on one replicate."""

    replicate: int
    method: str
    theta_hat: np.ndarray
    intervals: np.ndarray      # (p, 2) or None when intervals were off
    covered: np.ndarray        # (p,) bools or None
    rmse_m: float              # None for dnqr (no separable z-function)
    mspe: float


@dataclass
class MethodSummary:
    """Aggregates of one method over the successful replicates."""

    method: str
    bias: np.ndarray
    sd: np.ndarray
    coverage: np.ndarray
    mean_rmse_m: float
    mean_mspe: float
    replicates: int


@dataclass
class ExperimentReport:
    """Everything run_experiment measured, plus the settings that made it."""

    case: int
    n: int
    tau: float
    theta_true: np.ndarray
    q_requested: int
    failures: int
    master_seed: int
    level: float
    with_ci: bool
    align_m: bool
    methods: dict
    replicates: list


def _method_order(methods):
    methods = list(methods)
    for m in methods:
        if m not in MODES:
            raise ConfigError(f"unknown method {m!r}; choose from {MODES}")
    if len(set(methods)) != len(methods):
        raise ConfigError(f"duplicate method in {methods}")
    return tuple(m for m in MODES if m in methods)


def _run_replicate(spec, r, methods, master_seed, grid, with_ci, level,
                   align_m):
    rng = child_rng(master_seed, r)
    data = generate(spec, rng)
    n_test = spec.n // 5
    perm = shuffled_indices(rng, spec.n)
    train = data.subset(perm[:spec.n - n_test])
    test = data.subset(perm[spec.n - n_test:])
    theta_star = true_theta(spec)
    m_star = true_m(spec, test.z)

    out = []
    streams = dict(zip(MODES, split(rng, len(MODES))))
    for method in methods:
        tune_rng, fit_rng, cov_rng = split(streams[method], 3)
        candidates = [make_mode_config(method, c) for c in grid]
        best = tune(candidates, train, spec.tau, tune_rng)
        fitted = fit(train, spec.tau, best, fit_rng)

        intervals = covered = None
        if with_ci and method != "dnqr":
            est = covariance(fitted, train, best, cov_rng, level=level)
            intervals = est.intervals
            covered = ((intervals[:, 0] <= theta_star)
                       & (theta_star <= intervals[:, 1]))

        rmse = None
        if method != "dnqr":
            m_hat = m_values(fitted, test.z)
            if align_m:
                m_hat = m_hat + float(np.mean(m_star - m_hat))
            rmse = rmse_m(m_hat, m_star)

        y_hat = predict_batch(fitted, test.x, test.z)
        out.append(ReplicateResult(r, method, fitted.theta_hat, intervals,
                                   covered, rmse, mspe(y_hat, test.y)))
    return out


def _summarize(method, rows, theta_star):
    thetas = np.array([row.theta_hat for row in rows])
    if thetas.shape[1] == 0:
        bias = sd = coverage = None
    else:
        bias = thetas.mean(axis=0) - theta_star
        sd = np.std(thetas, axis=0, ddof=1) if len(rows) > 1 else None
        hits = [row.covered for row in rows if row.covered is not None]
        coverage = np.mean(hits, axis=0) if hits else None
    rmses = [row.rmse_m for row in rows if row.rmse_m is not None]
    mean_rmse = float(np.mean(rmses)) if rmses else None
    mean_mspe = float(np.mean([row.mspe for row in rows]))
    return MethodSummary(method, bias, sd, coverage, mean_rmse, mean_mspe,
                         len(rows))


def run_experiment(spec, q, methods=("dplqr",), master_seed=0, *,
                   grid=None, with_ci=True, level=0.95, align_m=False,
                   workers=1):
    """Run q replicates of `spec` and aggregate per-method metrics.

    grid defaults to scenario_grid(spec.case, spec.n); pass a list of
    TrainConfig to override (a single-entry list skips tuning). Failed
    replicates are dropped with a warning; more than 10% failures aborts.
    workers > 1 runs replicates in parallel processes; aggregation
    happens in replicate order either way, so results are identical.
    """
    if q < 1:
        raise ConfigError(f"need at least one replicate, got {q}")
    methods = _method_order(methods)
    if not methods:
        raise ConfigError("no methods requested")
    if grid is None:
        grid = scenario_grid(spec.case, spec.n)
    grid = list(grid)

    args = [(spec, r, methods, master_seed, grid, with_ci, level, align_m)
            for r in range(q)]
    rows, failures = [], 0
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_try_replicate, args))
    else:
        outcomes = [_try_replicate(a) for a in args]
    for r, outcome in enumerate(outcomes):
        if isinstance(outcome, str):
            warnings.warn(f"replicate {r} failed: {outcome}")
            failures += 1
        else:
            rows.extend(outcome)
    if failures > 0.1 * q:
        raise TrainingError(
            f"{failures} of {q} replicates failed; aborting")

    theta_star = true_theta(spec)
    summaries = {}
    for method in methods:
        method_rows = [row for row in rows if row.method == method]
        if method_rows:
            summaries[method] = _summarize(method, method_rows, theta_star)
    return ExperimentReport(
        case=spec.case, n=spec.n, tau=spec.tau, theta_true=theta_star,
        q_requested=q, failures=failures, master_seed=master_seed,
        level=level, with_ci=with_ci, align_m=align_m, methods=summaries,
        replicates=rows)


def _try_replicate(args):
    try:
        return _run_replicate(*args)
    except DplqrError as exc:
        return f"{type(exc).__name__}: {exc}"


def _rows_for_csv(report):
    rows = []
    for method in report.methods.values():
        p = 0 if method.bias is None else len(method.bias)
        for k in range(p):
            rows.append((method.method, "bias", k + 1, method.bias[k]))
            if method.sd is not None:
                rows.append((method.method, "sd", k + 1, method.sd[k]))
            if method.coverage is not None:
                rows.append((method.method, "coverage", k + 1,
                             method.coverage[k]))
        if method.mean_rmse_m is not None:
            rows.append((method.method, "rmse_m", "", method.mean_rmse_m))
        rows.append((method.method, "mspe", "", method.mean_mspe))
        rows.append((method.method, "replicates", "", method.replicates))
    return rows


def report_to_csv(report, path):
    """One row per method x metric (x coefficient where applicable)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["case", "n", "tau", "method", "metric",
                         "coefficient", "value"])
        for method, metric, coef, value in _rows_for_csv(report):
            formatted = str(value) if metric == "replicates" else repr(float(value))
            writer.writerow([report.case, report.n, repr(report.tau),
                             method, metric, coef, formatted])


def report_to_text(report):
    """Formatted per-method summary table, one line per method."""
    header = (f"case {report.case}  n={report.n}  tau={report.tau:g}  "
              f"Q={report.q_requested}  failures={report.failures}  "
              f"seed={report.master_seed}")
    cols = ["method", "bias1", "sd1", "cover1", "bias2", "sd2", "cover2",
            "rmse_m", "mspe"]
    lines = [header, "  ".join(f"{c:>8}" for c in cols)]

    def cell(value):
        return "       ." if value is None else f"{value:8.4f}"

    for method in report.methods.values():
        parts = [f"{method.method:>8}"]
        for k in (0, 1):
            has = method.bias is not None and len(method.bias) > k
            parts.append(cell(method.bias[k] if has else None))
            parts.append(cell(
                method.sd[k] if has and method.sd is not None else None))
            parts.append(cell(
                method.coverage[k]
                if has and method.coverage is not None else None))
        parts.append(cell(method.mean_rmse_m))
        parts.append(cell(method.mean_mspe))
        lines.append("  ".join(parts))
    return "\n".join(lines) + "\n"
