import csv
import json

import numpy as np
import pytest

from helpers import random_episode
from ptmon.benchmark import PredictorStub
from ptmon.conformal import ScoreConfig, calibrate, sample_level2_time
from ptmon.fragment import build_depth1_dictionary
from ptmon.logic import Predicate, parse_formula
from ptmon.metrics import (
    ReportRow,
    SweepRow,
    compute_metrics,
    evaluate_monitor,
    horizon_sweep,
    write_report_csv,
    write_report_json,
    write_sweep_csv,
)

LB = [np.array([0.5, -0.1, 0.0]), np.array([-1.0, 0.3, 0.2])]
RHO = [np.array([1.0, 0.2, -0.3]), np.array([-0.5, 0.4, 0.1])]


class TestComputeMetrics:
    def test_pooled_rates_oracle(self):
        got = compute_metrics(LB, RHO, level=1, k_max=2)
        assert got["csr"] == pytest.approx(100 * 4 / 6)
        assert got["gt_safe"] == pytest.approx(100 * 4 / 6)
        assert got["prec"] == pytest.approx(100 * 3 / 4)
        assert got["fpr"] == pytest.approx(100 * 1 / 2)
        # both episodes contain one overshoot (lb > rho), so neither is
        # covered in the all-times sense
        assert got["coverage"] == 0.0

    def test_all_safe_all_true(self):
        lb = [np.array([0.1, 0.2])]
        rho = [np.array([0.5, 0.6])]
        got = compute_metrics(lb, rho, level=1, k_max=0)
        assert got["csr"] == 100.0
        assert got["prec"] == 100.0
        assert got["fpr"] is None  # nothing truly unsafe
        assert got["coverage"] == 100.0

    def test_none_safe_blanks_precision(self):
        lb = [np.array([-0.1, -0.2])]
        rho = [np.array([0.5, -0.6])]
        got = compute_metrics(lb, rho, level=1, k_max=0)
        assert got["csr"] == 0.0
        assert got["prec"] is None

    def test_level2_coverage_uses_sampled_time(self):
        k_max, T = 2, 4
        # lb exceeds rho only at valid index 0; an episode is uncovered
        # exactly when the sampled time lands there.
        lb = [np.array([1.0, 0.0, 0.0])] * 6
        rho = [np.array([0.0, 1.0, 1.0])] * 6
        got = compute_metrics(lb, rho, level=2, k_max=k_max, coverage_seed=13)
        uncovered = sum(
            sample_level2_time(13, i, k_max, T) - k_max == 0 for i in range(6)
        )
        assert got["coverage"] == pytest.approx(100 * (6 - uncovered) / 6)

    def test_shape_guards(self):
        with pytest.raises(ValueError):
            compute_metrics([np.zeros(3)], [np.zeros(4)], level=1, k_max=0)
        with pytest.raises(ValueError):
            compute_metrics([], [], level=1, k_max=0)
        with pytest.raises(ValueError):
            compute_metrics([np.zeros(3)], [np.zeros(3), np.zeros(3)], level=1, k_max=0)


def small_setup():
    d = build_depth1_dictionary(2, ((0, 1), (0, 2)))
    rng = np.random.default_rng(21)
    eps = [random_episode(rng, 2, 9, names=d.predicate_names) for _ in range(12)]
    stub = PredictorStub(mode="semantic", scale=0.15, seed=4, dictionary=d)
    mon = calibrate(eps, stub, ScoreConfig(sigma=np.ones(d.r), alpha=0.1, level=2), d, tau_seed=2)
    test_eps = [random_episode(rng, 2, 9, names=d.predicate_names) for _ in range(5)]
    return d, mon, stub, test_eps


class TestEvaluateMonitor:
    def test_fragment_wide_radius_reported(self):
        d, mon, stub, test_eps = small_setup()
        f = parse_formula("G[0,1] p0", d.predicate_names)
        rows, errors = evaluate_monitor("semL2", mon, stub, test_eps, [f])
        assert not errors
        (row,) = rows
        assert row.monitor == "semL2"
        assert row.kind == "semantic"
        assert row.level == 2
        assert row.q_phi == mon.radius
        assert 0 <= row.csr <= 100

    def test_active_monitor_specializes_other_formulas(self):
        d, mon, stub, test_eps = small_setup()
        f = parse_formula("G[0,1] p0", d.predicate_names)
        g = parse_formula("F[0,2] p1", d.predicate_names)
        active = mon.for_formula(f)
        rows, errors = evaluate_monitor("act", active, stub, test_eps, [f, g])
        assert not errors
        by_formula = {r.formula: r for r in rows}
        assert by_formula["G[0,1] p0"].q_phi == active.radius
        assert by_formula["F[0,2] p1"].q_phi == active.for_formula(g).radius

    def test_uncertifiable_formula_lands_in_errors(self):
        d, mon, stub, test_eps = small_setup()
        alien = parse_formula("G[0,5] p0", d.predicate_names)
        rows, errors = evaluate_monitor("semL2", mon, stub, test_eps, [alien])
        assert not rows
        assert "G[0,5] p0" in errors


class TestHorizonSweep:
    def test_supported_windows_only(self):
        d, mon, stub, _ = small_setup()
        rows = horizon_sweep({"sem": mon}, [1, 2, 3], Predicate("p0", 0))
        ks = [r.k for r in rows]
        assert ks == [1, 2]  # the dictionary has no [0,3] window
        assert all(r.kind == "semantic" for r in rows)

    def test_rolling_depth_limits(self):
        rng = np.random.default_rng(30)
        eps = [random_episode(rng, 2, 8) for _ in range(8)]
        stub = PredictorStub(mode="predicates", scale=0.1, seed=1)
        mon = calibrate(eps, stub, ScoreConfig(sigma=np.ones(2 * 3), alpha=0.1, level=2), (2, 2))
        rows = horizon_sweep({"roll": mon}, [1, 2, 4], Predicate("p0", 0))
        assert [r.k for r in rows] == [1, 2]  # K=4 exceeds the history depth

    def test_radii_nondecreasing_in_k_for_rolling(self):
        rng = np.random.default_rng(31)
        eps = [random_episode(rng, 1, 25) for _ in range(40)]
        stub = PredictorStub(mode="predicates", scale=0.3, seed=2)
        mon = calibrate(eps, stub, ScoreConfig(sigma=np.ones(9), alpha=0.1, level=2), (1, 8))
        rows = horizon_sweep({"roll": mon}, [1, 2, 4, 8], Predicate("p0", 0))
        qs = [r.q_phi for r in rows]
        assert qs == sorted(qs)


class TestWriters:
    def rows(self):
        return [
            ReportRow("G[0,1] p0", "semL2", "semantic", 2, 0.123456789, 66.666, None, 50.0, 100.0, 88.8888),
        ]

    def test_csv_formatting(self, tmp_path):
        path = tmp_path / "report.csv"
        write_report_csv(self.rows(), path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == [
            "formula", "monitor", "kind", "level", "q_phi",
            "csr", "prec", "fpr", "gt_safe", "coverage",
        ]
        assert rows[1][4] == "0.123457"  # q keeps six significant digits
        assert rows[1][5] == "66.7"      # percents get one decimal
        assert rows[1][6] == ""          # blank when undefined
        assert rows[1][9] == "88.9"

    def test_json_sidecar_full_precision(self, tmp_path):
        path = tmp_path / "report.json"
        write_report_json(self.rows(), path)
        blob = json.loads(path.read_text())
        assert blob[0]["q_phi"] == 0.123456789
        assert blob[0]["prec"] is None

    def test_sweep_csv(self, tmp_path):
        path = tmp_path / "sweep.csv"
        write_sweep_csv([SweepRow(4, "roll", "rolling", 2, 0.25)], path)
        with open(path) as fh:
            rows = list(csv.reader(fh))
        assert rows == [["k", "monitor", "kind", "level", "q_phi"], ["4", "roll", "rolling", "2", "0.25"]]
