"""Tests for the replicated benchmark experiments."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dplqr.dgp import DgpSpec
from dplqr.errors import ConfigError, TrainingError
from dplqr.experiment import (report_to_csv, report_to_text, run_experiment,
                              scenario_config, scenario_grid)
from dplqr.optimizer import TrainConfig

# small, fast configuration for functional tests; accuracy is covered
# by the acceptance suite
_FAST = [TrainConfig(depth=2, width=4, epochs=30, minibatch=64,
                     early_stop_patience=30, learning_rate=0.02)]


class TestScenarioTables:
    def test_known_rows(self):
        cfg = scenario_config(1, 500)
        assert (cfg.depth, cfg.width, cfg.epochs) == (2, 16, 500)
        assert (cfg.minibatch, cfg.early_stop_patience) == (64, 50)
        cfg = scenario_config(3, 2000)
        assert (cfg.depth, cfg.width, cfg.epochs) == (3, 32, 600)
        assert (cfg.minibatch, cfg.early_stop_patience) == (128, 100)

    def test_heteroscedastic_cases_share_base_rows(self):
        for case in (4, 5, 6):
            assert scenario_config(case, 500) == scenario_config(case - 3, 500)
            assert scenario_config(case, 2000) == scenario_config(case - 3, 2000)

    def test_grid_varies_learning_rate_only(self):
        grid = scenario_grid(2, 500)
        assert len(grid) == 2
        assert {c.learning_rate for c in grid} == {0.009, 0.01}
        a, b = grid
        assert (a.depth, a.width, a.epochs) == (b.depth, b.width, b.epochs)


class TestRunExperiment:
    def test_report_structure(self):
        spec = DgpSpec(case=1, n=200, tau=0.5)
        report = run_experiment(spec, 3, methods=("dplqr",), master_seed=0,
                                grid=_FAST, with_ci=False)
        assert report.q_requested == 3
        assert report.failures == 0
        assert set(report.methods) == {"dplqr"}
        summary = report.methods["dplqr"]
        assert summary.replicates == 3
        assert summary.bias.shape == (2,)
        assert summary.sd.shape == (2,)
        assert summary.coverage is None
        assert summary.mean_rmse_m is not None
        assert summary.mean_mspe > 0
        assert len(report.replicates) == 3

    def test_with_intervals(self):
        spec = DgpSpec(case=1, n=200, tau=0.5)
        report = run_experiment(spec, 2, methods=("dplqr",), master_seed=1,
                                grid=_FAST, with_ci=True)
        summary = report.methods["dplqr"]
        assert summary.coverage.shape == (2,)
        assert np.all((0.0 <= summary.coverage) & (summary.coverage <= 1.0))
        row = report.replicates[0]
        assert row.intervals.shape == (2, 2)
        assert row.covered.shape == (2,)

    def test_multiple_methods_and_dnqr_gaps(self):
        spec = DgpSpec(case=1, n=200, tau=0.5)
        report = run_experiment(
            spec, 2, methods=("dplqr", "lqr", "dnqr"), master_seed=2,
            grid=_FAST, with_ci=False)
        assert set(report.methods) == {"dplqr", "lqr", "dnqr"}
        dnqr = report.methods["dnqr"]
        # dnqr has no linear coefficients and no separable z-function
        assert dnqr.bias is None and dnqr.coverage is None
        assert dnqr.mean_rmse_m is None
        assert dnqr.mean_mspe > 0

    def test_reproducible(self):
        spec = DgpSpec(case=4, n=200, tau=0.3)
        a = run_experiment(spec, 2, master_seed=7, grid=_FAST, with_ci=False)
        b = run_experiment(spec, 2, master_seed=7, grid=_FAST, with_ci=False)
        assert_allclose(a.methods["dplqr"].bias, b.methods["dplqr"].bias,
                        rtol=0)
        for ra, rb in zip(a.replicates, b.replicates):
            assert_allclose(ra.theta_hat, rb.theta_hat, rtol=0)

    def test_method_results_stable_under_method_set(self):
        # dropping a method must not change another method's stream
        spec = DgpSpec(case=1, n=200, tau=0.5)
        both = run_experiment(spec, 2, methods=("dplqr", "lqr"),
                              master_seed=3, grid=_FAST, with_ci=False)
        alone = run_experiment(spec, 2, methods=("lqr",),
                               master_seed=3, grid=_FAST, with_ci=False)
        for rb, ra in zip(
                [r for r in both.replicates if r.method == "lqr"],
                alone.replicates):
            assert_allclose(rb.theta_hat, ra.theta_hat, rtol=0)

    def test_failure_abort(self):
        # a minibatch far larger than any replicate's training split makes
        # every replicate fail validation, tripping the 10% abort rule
        spec = DgpSpec(case=1, n=100, tau=0.5)
        bad = [TrainConfig(minibatch=10 ** 6)]
        with pytest.raises(TrainingError):
            with pytest.warns(UserWarning):
                run_experiment(spec, 2, master_seed=0, grid=bad,
                               with_ci=False)

    def test_unknown_method_rejected(self):
        spec = DgpSpec(case=1, n=100, tau=0.5)
        with pytest.raises(ConfigError):
            run_experiment(spec, 1, methods=("ols",), grid=_FAST)

    def test_zero_replicates_rejected(self):
        spec = DgpSpec(case=1, n=100, tau=0.5)
        with pytest.raises(ConfigError):
            run_experiment(spec, 0, grid=_FAST)

    def test_align_m_changes_rmse_only(self):
        spec = DgpSpec(case=1, n=200, tau=0.5)
        plain = run_experiment(spec, 2, master_seed=5, grid=_FAST,
                               with_ci=False, align_m=False)
        aligned = run_experiment(spec, 2, master_seed=5, grid=_FAST,
                                 with_ci=False, align_m=True)
        assert_allclose(plain.methods["dplqr"].bias,
                        aligned.methods["dplqr"].bias, rtol=0)
        # aligning subtracts the mean discrepancy, so it cannot hurt
        assert (aligned.methods["dplqr"].mean_rmse_m
                <= plain.methods["dplqr"].mean_rmse_m + 1e-12)


class TestReportOutput:
    def _report(self):
        spec = DgpSpec(case=1, n=200, tau=0.5)
        return run_experiment(spec, 2, methods=("dplqr", "dnqr"),
                              master_seed=4, grid=_FAST, with_ci=True)

    def test_text_contains_methods_and_header(self):
        text = report_to_text(self._report())
        assert "case 1" in text and "n=200" in text
        assert "dplqr" in text and "dnqr" in text
        assert "rmse_m" in text

    def test_csv_round_trip(self, tmp_path):
        import csv
        report = self._report()
        path = tmp_path / "report.csv"
        report_to_csv(report, str(path))
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
        header, body = rows[0], rows[1:]
        assert header == ["case", "n", "tau", "method", "metric",
                          "coefficient", "value"]
        metrics = {(r[3], r[4], r[5]) for r in body}
        assert ("dplqr", "bias", "1") in metrics
        assert ("dplqr", "coverage", "2") in metrics
        assert ("dnqr", "mspe", "") in metrics
        # numeric cells are repr round-trippable
        bias_cell = next(r[6] for r in body
                         if (r[3], r[4], r[5]) == ("dplqr", "bias", "1"))
        assert float(bias_cell) == report.methods["dplqr"].bias[0]
