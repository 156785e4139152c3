import io
import json

import numpy as np
import pytest

from helpers import random_episode
from ptmon.benchmark import PredictorStub
from ptmon.conformal import ScoreConfig, calibrate, certified_lower_bound, observer_calibrate
from ptmon.fragment import build_depth1_dictionary, compile_history_decoder
from ptmon.logic import format_formula, parse_formula
from ptmon.monitors import (
    EpisodeResult,
    Label,
    MonitorVerdict,
    RollingBuffer,
    observer_certify,
    rolling_certify,
    rolling_step,
    run_episode,
    semantic_certify,
    verdict_to_json,
    write_verdicts_csv,
    write_verdicts_jsonl,
)
from ptmon.robustness import BasisKind, BasisVector, predicate_history_basis, semantic_basis


def rolling_monitor(rng, m=2, k_max=3, n=10, T=9, **stub_kw):
    eps = [random_episode(rng, m, T) for _ in range(n)]
    stub = PredictorStub(mode="predicates", scale=0.1, seed=2, **stub_kw)
    cfg = ScoreConfig(sigma=np.ones(m * (k_max + 1)), alpha=0.1, level=2)
    return calibrate(eps, stub, cfg, (m, k_max)), stub, eps


class TestRollingBuffer:
    def test_layout_newest_first(self):
        buf = RollingBuffer(2, 2)
        for step in range(3):
            buf.push([float(step), 10.0 + step])
        v = buf.history_vector()
        # predicate 0: lags 0,1,2 -> values 2,1,0; predicate 1: 12,11,10
        assert np.array_equal(v, [2.0, 1.0, 0.0, 12.0, 11.0, 10.0])
        assert buf.t == 2

    def test_eviction_keeps_depth(self):
        buf = RollingBuffer(1, 1)
        for step in range(5):
            buf.push([float(step)])
        assert buf.fill == 2
        assert np.array_equal(buf.history_vector(), [4.0, 3.0])

    def test_drop_resets_history(self):
        buf = RollingBuffer(1, 2)
        for step in range(4):
            buf.push([1.0])
        buf.mark_dropped()
        assert buf.fill == 0
        assert buf.t == 4
        buf.push([2.0])
        assert np.array_equal(buf.history_vector(), [2.0, 0.0, 0.0])

    def test_shape_guard(self):
        buf = RollingBuffer(2, 1)
        with pytest.raises(ValueError):
            buf.push([1.0, 2.0, 3.0])

    def test_matches_episode_history_when_fed_truth(self):
        rng = np.random.default_rng(0)
        ep = random_episode(rng, 3, 8)
        buf = RollingBuffer(3, 4)
        for t in range(9):
            buf.push(ep.mu[:, t])
        want = predicate_history_basis(ep, 4, 8).values
        assert np.array_equal(buf.history_vector(), want)


class TestRollingCertify:
    def test_warmup_then_verdicts(self):
        rng = np.random.default_rng(1)
        mon, stub, _ = rolling_monitor(rng)
        f = parse_formula("G[0,2] p0", ("p0", "p1"))
        buf = RollingBuffer(2, 3)
        labels = []
        for t in range(6):
            rolling_step(buf, [0.5, 0.5])
            labels.append(rolling_certify(buf, mon, f).label)
        assert labels[:3] == [Label.WARMING_UP] * 3
        assert all(l is not Label.WARMING_UP for l in labels[3:])

    def test_equals_direct_certified_bound(self):
        rng = np.random.default_rng(2)
        mon, stub, _ = rolling_monitor(rng)
        f = parse_formula("G[0,2] p0 | F[0,1] p1", ("p0", "p1"))
        dec = compile_history_decoder(f, 2, 3)
        ep = random_episode(rng, 2, 7)
        buf = RollingBuffer(2, 3)
        for t in range(8):
            buf.push(ep.mu[:, t])
        v = rolling_certify(buf, mon, f, decoder=dec)
        want = certified_lower_bound(
            mon, BasisVector(BasisKind.PREDICATE_HISTORY, predicate_history_basis(ep, 3, 7).values, 7), dec
        )
        assert v.lower_bound == want

    def test_drop_forces_rewarming_for_deep_formulas(self):
        rng = np.random.default_rng(3)
        mon, stub, _ = rolling_monitor(rng)
        deep = parse_formula("G[0,3] p0", ("p0", "p1"))
        shallow = parse_formula("p0 | p1", ("p0", "p1"))
        buf = RollingBuffer(2, 3)
        for _ in range(6):
            rolling_step(buf, [1.0, 1.0])
        rolling_step(buf, None)  # dropped prediction
        rolling_step(buf, [1.0, 1.0])
        assert rolling_certify(buf, mon, deep).label is Label.WARMING_UP
        # depth-0 formulas only need the freshest step back
        assert rolling_certify(buf, mon, shallow).label is not Label.WARMING_UP

    def test_tie_is_safe(self):
        rng = np.random.default_rng(4)
        mon, stub, _ = rolling_monitor(rng)
        mon.radius = 1.0
        f = parse_formula("p0", ("p0", "p1"))
        buf = RollingBuffer(2, 3)
        for _ in range(5):
            buf.push([2.0, 2.0])  # lb = 2.0 - 1.0*1.0 = 1.0
        v = rolling_certify(buf, mon, f)
        assert v.label is Label.SAFE
        buf2 = RollingBuffer(2, 3)
        for _ in range(5):
            buf2.push([1.0, 2.0])  # lb = exactly 0.0
        assert rolling_certify(buf2, mon, f).label is Label.SAFE


class TestSemanticCertify:
    def test_warmup_and_verdict(self):
        d = build_depth1_dictionary(2, ((0, 1), (0, 2)))
        rng = np.random.default_rng(5)
        eps = [random_episode(rng, 2, 8, names=d.predicate_names) for _ in range(8)]
        stub = PredictorStub(mode="semantic", scale=0.1, seed=1, dictionary=d)
        mon = calibrate(eps, stub, ScoreConfig(sigma=np.ones(d.r), alpha=0.1, level=2), d)
        f = parse_formula("G[0,1] p0", d.predicate_names)
        early = BasisVector(BasisKind.SEMANTIC, np.zeros(d.r), 1)
        assert semantic_certify(early, mon, f).label is Label.WARMING_UP
        ep = eps[0]
        t = 5
        hat = BasisVector(BasisKind.SEMANTIC, semantic_basis(ep, d, t).values, t)
        v = semantic_certify(hat, mon, f)
        assert v.t == t
        assert v.lower_bound is not None


class TestObserverCertify:
    def test_formula_guard(self):
        rng = np.random.default_rng(6)
        eps = [random_episode(rng, 1, 6) for _ in range(8)]
        stub = PredictorStub(mode="predicates", scale=0.1, seed=0)
        f = parse_formula("G[0,1] p0", ("p0",))
        mon = observer_calibrate(eps, stub, f, 0.1, k_max=1)
        other = parse_formula("F[0,1] p0", ("p0",))
        buf = RollingBuffer(1, 1)
        buf.push([1.0])
        buf.push([1.0])
        with pytest.raises(ValueError):
            observer_certify(buf, mon, other)

    def test_constant_bias_bound_is_exact(self):
        rng = np.random.default_rng(7)
        eps = [random_episode(rng, 1, 6) for _ in range(8)]
        stub = PredictorStub(mode="predicates", scale=0.0, bias=0.5, seed=0)
        f = parse_formula("G[0,1] p0", ("p0",))
        mon = observer_calibrate(eps, stub, f, 0.1, k_max=1)
        assert mon.radius == pytest.approx(0.5)
        buf = RollingBuffer(1, 1)
        buf.push([2.0])
        buf.push([3.0])
        v = observer_certify(buf, mon, f)
        # interval lower end: min over lags of (value - 0.5)
        assert v.lower_bound == pytest.approx(min(3.0, 2.0) - 0.5)
        assert v.label is Label.SAFE


class TestRunEpisode:
    def test_semantic_full_episode(self):
        d = build_depth1_dictionary(2, ((0, 1), (0, 2)))
        rng = np.random.default_rng(8)
        eps = [random_episode(rng, 2, 10, names=d.predicate_names) for _ in range(10)]
        stub = PredictorStub(mode="semantic", scale=0.1, seed=3, dictionary=d)
        mon = calibrate(eps, stub, ScoreConfig(sigma=np.ones(d.r), alpha=0.1, level=2), d)
        f1 = parse_formula("G[0,1] p0", d.predicate_names)
        f2 = parse_formula("F[0,2] p1 | G[0,2] p0", d.predicate_names)
        ep = random_episode(rng, 2, 10, names=d.predicate_names)
        res = run_episode(ep, stub, mon, [f1, f2])
        assert not res.errors
        for f in (f1, f2):
            name = format_formula(f)
            vs = res.by_formula(name)
            assert len(vs) == 11  # one per step
            assert sum(v.label is Label.WARMING_UP for v in vs) == d.K_max
            assert res.lower_bounds(name).shape == res.truth[name].shape

    def test_unsupported_formula_is_reported_not_fatal(self):
        d = build_depth1_dictionary(2, ((0, 1),))
        rng = np.random.default_rng(9)
        eps = [random_episode(rng, 2, 8, names=d.predicate_names) for _ in range(6)]
        stub = PredictorStub(mode="semantic", scale=0.1, seed=3, dictionary=d)
        mon = calibrate(eps, stub, ScoreConfig(sigma=np.ones(d.r), alpha=0.1, level=2), d)
        good = parse_formula("G[0,1] p0", d.predicate_names)
        alien = parse_formula("G[0,7] p0", d.predicate_names)
        res = run_episode(eps[0], stub, mon, [good, alien])
        assert format_formula(alien) in res.errors
        assert format_formula(good) in res.truth
        assert format_formula(alien) not in res.truth

    def test_rolling_full_episode_bounds_align_with_truth(self):
        rng = np.random.default_rng(10)
        mon, stub, eps = rolling_monitor(rng, m=2, k_max=3, n=12, T=10)
        f = parse_formula("G[0,2] p0 & F[0,1] p1", ("p0", "p1"))
        ep = random_episode(rng, 2, 10)
        res = run_episode(ep, stub, mon, [f])
        name = format_formula(f)
        lbs = res.lower_bounds(name)
        assert lbs.shape == (10 - 3 + 1,)
        assert res.truth[name].shape == lbs.shape

    def test_observer_episode(self):
        rng = np.random.default_rng(11)
        eps = [random_episode(rng, 2, 9) for _ in range(10)]
        stub = PredictorStub(mode="predicates", scale=0.1, seed=4)
        f = parse_formula("G[0,2] p0", ("p0", "p1"))
        mon = observer_calibrate(eps, stub, f, 0.1, k_max=3)
        ep = random_episode(rng, 2, 9)
        res = run_episode(ep, stub, mon, [f])
        assert not res.errors
        assert res.lower_bounds(format_formula(f)).size == 9 - 3 + 1

    def test_episode_shorter_than_history_rejected(self):
        rng = np.random.default_rng(12)
        mon, stub, _ = rolling_monitor(rng, m=2, k_max=3)
        ep = random_episode(rng, 2, 2)
        with pytest.raises(ValueError):
            run_episode(ep, stub, mon, [])


class TestVerdictSerialization:
    def test_json_fields(self):
        v = MonitorVerdict(4, "G[0,1] p0", 0.25, Label.SAFE)
        obj = verdict_to_json(v, episode=7)
        assert obj == {"t": 4, "formula": "G[0,1] p0", "lb": 0.25, "label": "safe", "episode": 7}

    def test_warming_serializes_null_lb(self):
        v = MonitorVerdict(0, "p0", None, Label.WARMING_UP)
        assert verdict_to_json(v)["lb"] is None

    def test_jsonl_stream(self):
        vs = [
            MonitorVerdict(0, "p0", None, Label.WARMING_UP),
            MonitorVerdict(1, "p0", -0.5, Label.UNCERTAIN),
        ]
        buf = io.StringIO()
        write_verdicts_jsonl(vs, buf, episode=0)
        lines = [json.loads(l) for l in buf.getvalue().splitlines()]
        assert lines[1]["label"] == "uncertain"
        assert lines[1]["episode"] == 0

    def test_csv_stream_with_optional_header(self):
        vs = [MonitorVerdict(1, "p0", 0.5, Label.SAFE)]
        buf = io.StringIO()
        write_verdicts_csv(vs, buf, header=True, episode=0)
        write_verdicts_csv(vs, buf, header=False, episode=1)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "t,formula,lb,label,episode"
        assert len(lines) == 3
