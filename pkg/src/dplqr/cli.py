"""Command line interface.

Subcommands:

  fit       train a model on a CSV file, write model + report JSON
  predict   apply a saved model to a CSV file, write predictions CSV
  simulate  run a replicated benchmark experiment, write report files
  tune      hold-out selection over a hyperparameter grid, print winner

Every command is deterministic given its inputs and --seed. Flags
override matching keys of an optional JSON config file (--config).
Failures exit nonzero with a single stderr line of the form
``error:<category>: <message>``.
"""

import argparse
import itertools
import json
import os
import sys

import numpy as np

from .dgp import DgpSpec
from .errors import (ConfigError, DataError, DplqrError, SingularMatrixError,
                     TrainingError)
from .experiment import (report_to_csv, report_to_text, run_experiment,
                         scenario_grid)
from .inference import covariance
from .model import fit as fit_model
from .model import make_mode_config, predict_batch
from .modelio import (ColumnRoles, apply_scaling, compute_scaling, load_csv,
                      load_model, save_model, write_json)
from .optimizer import MODES, TrainConfig, tune
from .rng import make_rng, split

_CATEGORIES = (
    (ConfigError, "config"),
    (DataError, "data"),
    (TrainingError, "training"),
    (SingularMatrixError, "singular"),
    (DplqrError, "internal"),
)


def _category(exc):
    for cls, name in _CATEGORIES:
        if isinstance(exc, cls):
            return name
    return "internal"


def _clean(value):
    """Make a value JSON-safe: arrays to lists, non-finite floats to None."""
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    return value


def _columns(text):
    if text is None or text.strip() == "":
        return []
    return [c.strip() for c in text.split(",")]


def _floats(text):
    try:
        return [float(v) for v in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return [int(v) for v in str(text).split(",")]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}")


def _merge_config(args, keys):
    """Fill unset args from the --config JSON file, then apply defaults."""
    if getattr(args, "config", None):
        if not os.path.exists(args.config):
            raise DataError(f"no such config file: {args.config}")
        with open(args.config, encoding="utf-8") as handle:
            try:
                file_config = json.load(handle)
            except json.JSONDecodeError as exc:
                raise DataError(f"{args.config} is not valid JSON: {exc}")
        unknown = set(file_config) - set(keys)
        if unknown:
            raise ConfigError(
                f"unknown key(s) in {args.config}: {sorted(unknown)}")
        for key, value in file_config.items():
            if getattr(args, key, None) is None:
                setattr(args, key, value)
    for key, default in keys.items():
        if getattr(args, key, None) is None:
            setattr(args, key, default)
    return args


_FIT_DEFAULTS = {
    "data": None, "y": None, "x": "", "z": "", "tau": 0.5, "mode": "dplqr",
    "seed": 0, "level": 0.95, "depth": "3", "width": "32", "lr": "0.01",
    "epochs": 500, "minibatch": 64, "patience": 50, "scale": True,
    "out": None, "report": None,
}


def _build_grid(args):
    depths = _ints(args.depth)
    widths = _ints(args.width)
    lrs = _floats(args.lr)
    grid = [
        make_mode_config(args.mode, TrainConfig(
            depth=d, width=w, epochs=int(args.epochs),
            minibatch=int(args.minibatch),
            early_stop_patience=int(args.patience),
            learning_rate=lr, seed=int(args.seed)))
        for d, w, lr in itertools.product(depths, widths, lrs)
    ]
    for config in grid:
        config.validate()
    return grid


def _load_fit_inputs(args):
    if args.data is None:
        raise ConfigError("--data is required")
    if args.y is None:
        raise ConfigError("--y is required")
    roles = ColumnRoles(args.y, _columns(args.x), _columns(args.z))
    raw = load_csv(args.data, roles)
    scaling = compute_scaling(raw) if args.scale else None
    return apply_scaling(raw, scaling), roles, scaling


def cmd_fit(args):
    _merge_config(args, _FIT_DEFAULTS)
    if args.no_scale:
        args.scale = False
    if args.out is None:
        raise ConfigError("--out is required")
    if args.mode not in MODES:
        raise ConfigError(f"--mode must be one of {MODES}, got {args.mode!r}")
    data, roles, scaling = _load_fit_inputs(args)
    grid = _build_grid(args)

    rng = make_rng(int(args.seed))
    tune_rng, fit_rng, cov_rng = split(rng, 3)
    best = tune(grid, data, args.tau, tune_rng)
    fitted = fit_model(data, args.tau, best, fit_rng)

    estimate = None
    if fitted.mode != "dnqr" and data.p >= 1 and data.q >= 1:
        estimate = covariance(fitted, data, best, cov_rng,
                              level=float(args.level))

    save_model(args.out, fitted, roles, scaling)
    payload = {
        "schema_version": 1,
        "command": "fit",
        "n": data.n, "p": data.p, "q": data.q,
        "tau": float(args.tau), "mode": fitted.mode,
        "level": float(args.level), "scaled": bool(args.scale),
        "columns": {"y": roles.y, "x": roles.x, "z": roles.z},
        "config": {
            "depth": best.depth, "width": best.width,
            "epochs": best.epochs, "minibatch": best.minibatch,
            "early_stop_patience": best.early_stop_patience,
            "learning_rate": best.learning_rate, "seed": best.seed,
        },
        "grid_size": len(grid),
        "theta_hat": fitted.theta_hat,
        "covariance": None if estimate is None else {
            "f0_hat": estimate.f0_hat,
            "omega_hat": estimate.omega_hat,
            "sigma_hat": estimate.sigma_hat,
            "intervals": estimate.intervals,
        },
        "history": {
            "train_loss": fitted.history.train_loss,
            "val_loss": fitted.history.val_loss,
            "best_epoch": fitted.history.best_epoch,
            "stopped_epoch": fitted.history.stopped_epoch,
        },
    }
    if args.report:
        write_json(args.report, _clean(payload))

    print(f"fit: mode={fitted.mode} tau={float(args.tau):g} n={data.n}"
          f" p={data.p} q={data.q}")
    for k, coef in enumerate(fitted.theta_hat):
        line = f"  theta[{k + 1}] = {coef: .6f}"
        if estimate is not None:
            lower, upper = estimate.intervals[k]
            line += f"  ({lower: .6f}, {upper: .6f})"
        print(line)
    print(f"wrote {args.out}" + (f" and {args.report}" if args.report else ""))
    return 0


def cmd_predict(args):
    fitted, roles, scaling = load_model(args.model)
    data = load_csv(args.data, roles, require_y=False, allow_empty=True)
    data = apply_scaling(data, scaling)
    if data.p != fitted.x_dim or data.q != fitted.z_dim:
        raise DataError(
            f"model expects p={fitted.x_dim}, q={fitted.z_dim} but data"
            f" has p={data.p}, q={data.q}")
    predictions = predict_batch(fitted, data.x, data.z)
    with open(args.out, "w", encoding="utf-8") as handle:
        handle.write("prediction\n")
        for value in predictions:
            handle.write(repr(float(value)) + "\n")
    print(f"wrote {len(predictions)} prediction(s) to {args.out}")
    return 0


_SIM_DEFAULTS = {
    "case": 1, "n": 500, "tau": 0.5, "replicates": 160, "methods": "dplqr",
    "seed": 0, "level": 0.95, "workers": 1, "sigma_x_terms": "x1+x2",
    "out_dir": None, "depth": None, "width": None, "lr": None,
    "epochs": None, "minibatch": None, "patience": None,
}


def cmd_simulate(args):
    _merge_config(args, _SIM_DEFAULTS)
    if args.out_dir is None:
        raise ConfigError("--out-dir is required")
    spec = DgpSpec(case=int(args.case), n=int(args.n), tau=float(args.tau),
                   sigma_x_terms=args.sigma_x_terms)
    methods = _columns(args.methods)

    overrides = (args.depth, args.width, args.lr, args.epochs,
                 args.minibatch, args.patience)
    if any(v is not None for v in overrides):
        base = scenario_grid(spec.case, spec.n, seed=int(args.seed))[0]
        args.depth = args.depth if args.depth is not None else str(base.depth)
        args.width = args.width if args.width is not None else str(base.width)
        args.lr = (args.lr if args.lr is not None
                   else repr(base.learning_rate))
        args.epochs = (args.epochs if args.epochs is not None
                       else base.epochs)
        args.minibatch = (args.minibatch if args.minibatch is not None
                          else base.minibatch)
        args.patience = (args.patience if args.patience is not None
                         else base.early_stop_patience)
        args.mode = "dplqr"
        args.seed = int(args.seed)
        grid = _build_grid(args)
    else:
        grid = scenario_grid(spec.case, spec.n, seed=int(args.seed))

    report = run_experiment(
        spec, int(args.replicates), methods, int(args.seed), grid=grid,
        with_ci=not args.no_ci, level=float(args.level),
        align_m=args.align_m, workers=int(args.workers))

    os.makedirs(args.out_dir, exist_ok=True)
    report_to_csv(report, os.path.join(args.out_dir, "report.csv"))
    text = report_to_text(report)
    with open(os.path.join(args.out_dir, "report.txt"), "w",
              encoding="utf-8") as handle:
        handle.write(text)
    payload = {
        "schema_version": 1,
        "command": "simulate",
        "case": report.case, "n": report.n, "tau": report.tau,
        "theta_true": report.theta_true,
        "q_requested": report.q_requested, "failures": report.failures,
        "master_seed": report.master_seed, "level": report.level,
        "with_ci": report.with_ci, "align_m": report.align_m,
        "methods": {
            name: {
                "bias": s.bias, "sd": s.sd, "coverage": s.coverage,
                "mean_rmse_m": s.mean_rmse_m, "mean_mspe": s.mean_mspe,
                "replicates": s.replicates,
            } for name, s in report.methods.items()
        },
        "replicate_results": [
            {"replicate": r.replicate, "method": r.method,
             "theta_hat": r.theta_hat, "intervals": r.intervals,
             "covered": r.covered, "rmse_m": r.rmse_m, "mspe": r.mspe}
            for r in report.replicates
        ],
    }
    write_json(os.path.join(args.out_dir, "report.json"), _clean(payload))
    print(text, end="")
    print(f"wrote report.csv, report.txt, report.json to {args.out_dir}")
    return 0


def cmd_tune(args):
    _merge_config(args, _FIT_DEFAULTS)
    if args.no_scale:
        args.scale = False
    if args.mode not in MODES:
        raise ConfigError(f"--mode must be one of {MODES}, got {args.mode!r}")
    data, _, _ = _load_fit_inputs(args)
    grid = _build_grid(args)
    rng = make_rng(int(args.seed))
    best = tune(grid, data, args.tau, rng)
    chosen = {
        "depth": best.depth, "width": best.width, "epochs": best.epochs,
        "minibatch": best.minibatch,
        "early_stop_patience": best.early_stop_patience,
        "learning_rate": best.learning_rate, "seed": best.seed,
        "mode": best.mode,
    }
    print(json.dumps(chosen, sort_keys=True, indent=2))
    if args.out:
        write_json(args.out, chosen)
    return 0


def _add_grid_flags(sub):
    sub.add_argument("--depth", help="network depth(s), comma-separated")
    sub.add_argument("--width", help="hidden width(s), comma-separated")
    sub.add_argument("--lr", help="learning rate(s), comma-separated")
    sub.add_argument("--epochs", type=int)
    sub.add_argument("--minibatch", type=int)
    sub.add_argument("--patience", type=int,
                     help="early-stop patience in epochs")


def _add_fit_like_flags(sub):
    sub.add_argument("--data", help="input CSV path")
    sub.add_argument("--y", help="response column name")
    sub.add_argument("--x", help="linear covariate columns, comma-separated")
    sub.add_argument("--z", help="network covariate columns, comma-separated")
    sub.add_argument("--tau", type=float)
    sub.add_argument("--mode", choices=MODES)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--level", type=float, help="confidence level")
    sub.add_argument("--no-scale", action="store_true",
                     help="skip min-max scaling of covariates")
    sub.add_argument("--config", help="JSON config file; flags override it")
    _add_grid_flags(sub)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="dplqr",
        description="Partially linear quantile regression with network"
                    " nonparametric components.")
    commands = parser.add_subparsers(dest="command", required=True)

    fit_cmd = commands.add_parser("fit", help="train a model on a CSV file")
    _add_fit_like_flags(fit_cmd)
    fit_cmd.add_argument("--out", help="model JSON output path")
    fit_cmd.add_argument("--report", help="report JSON output path")
    fit_cmd.set_defaults(func=cmd_fit)

    predict_cmd = commands.add_parser(
        "predict", help="apply a saved model to a CSV file")
    predict_cmd.add_argument("--model", required=True)
    predict_cmd.add_argument("--data", required=True)
    predict_cmd.add_argument("--out", required=True)
    predict_cmd.set_defaults(func=cmd_predict)

    sim_cmd = commands.add_parser(
        "simulate", help="run a replicated benchmark experiment")
    sim_cmd.add_argument("--case", type=int)
    sim_cmd.add_argument("--n", type=int)
    sim_cmd.add_argument("--tau", type=float)
    sim_cmd.add_argument("--replicates", type=int)
    sim_cmd.add_argument("--methods",
                         help="comma-separated subset of " + ",".join(MODES))
    sim_cmd.add_argument("--seed", type=int)
    sim_cmd.add_argument("--level", type=float)
    sim_cmd.add_argument("--workers", type=int)
    sim_cmd.add_argument("--out-dir", dest="out_dir")
    sim_cmd.add_argument("--no-ci", action="store_true",
                         help="skip confidence intervals and coverage")
    sim_cmd.add_argument("--align-m", action="store_true",
                         help="remove the mean level gap before rmse_m")
    sim_cmd.add_argument("--sigma-x-terms", dest="sigma_x_terms",
                         choices=("x1+x2", "2x1"))
    sim_cmd.add_argument("--config", help="JSON config file; flags override")
    _add_grid_flags(sim_cmd)
    sim_cmd.set_defaults(func=cmd_simulate)

    tune_cmd = commands.add_parser(
        "tune", help="hold-out selection over a hyperparameter grid")
    _add_fit_like_flags(tune_cmd)
    tune_cmd.add_argument("--out", help="write the chosen config as JSON")
    tune_cmd.set_defaults(func=cmd_tune)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DplqrError as exc:
        print(f"error:{_category(exc)}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
