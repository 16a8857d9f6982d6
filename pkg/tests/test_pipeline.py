"""Validation loop behavior: scoring, reconstruction, reports, batch path."""

import dataclasses
import math

import numpy as np
import pytest

from sensorval.detectors import pca_fit
from sensorval.features import Sample
from sensorval.fuzzy import FuzzySystem, LinguisticVariable, MembershipFunction, Rule
from sensorval.pipeline import (
    FLAG_BITS,
    ConfigError,
    FaultTracker,
    PipelineConfig,
    SensorValidator,
    Validator,
    run_batch,
)
from sensorval.simulate import FaultSpec, SignalProfile, generate, inject

from oracles import scan_reports


def _stream(n=120, level=200.0, noise=1.0, seed=101, sensor="s1"):
    return generate(
        SignalProfile("constant", level=level, noise_std=noise, seed=seed), n, sensor
    )


def _run(samples, config=None, sensor="s1"):
    v = SensorValidator(config or PipelineConfig(), sensor)
    outs = [v.step(s) for s in samples]
    return outs, v.finalize()


# clean-stream behavior


def test_zero_noise_constant_is_pure_pass_through():
    outs, reports = _run(_stream(noise=0.0))
    assert all(not o.reconstructed for o in outs)
    assert all(o.accepted == o.raw for o in outs)
    assert reports == []


def test_noisy_clean_stream_yields_no_reports():
    outs, reports = _run(_stream())
    assert reports == []
    warm = PipelineConfig().warmup
    accepted = sum(not o.reconstructed for o in outs[warm:])
    assert accepted >= 0.95 * (len(outs) - warm)


def test_outcomes_are_deterministic():
    a, _ = _run(_stream())
    b, _ = _run(_stream())
    assert a == b


# outcome invariants


def test_outcome_invariants_on_spiky_stream():
    stream = _stream(n=400, seed=7)
    faulty = inject(stream, FaultSpec("noise_burst", 150, 60, 100.0), seed=42)
    cfg = PipelineConfig()
    outs, _ = _run(faulty.samples, cfg)
    saw_reconstruction = False
    for sample, o in zip(faulty.samples, outs):
        assert o.raw == sample.value
        assert 0.0 <= o.confidence <= 1.0
        if o.reconstructed:
            saw_reconstruction = True
            assert o.confidence < cfg.accept_threshold
        else:
            assert o.accepted == o.raw
    assert saw_reconstruction


def test_reconstruction_stays_in_accepted_envelope():
    stream = _stream(n=400, seed=8)
    faulty = inject(stream, FaultSpec("noise_burst", 150, 60, 100.0), seed=43)
    outs, _ = _run(faulty.samples)
    lo, hi = math.inf, -math.inf
    for o in outs:
        if o.reconstructed:
            assert lo - 1e-12 <= o.accepted <= hi + 1e-12
        lo = min(lo, o.accepted)
        hi = max(hi, o.accepted)


def test_warmup_suppresses_reconstruction():
    cfg = PipelineConfig(warmup=5)
    outs, _ = _run(_stream(), cfg)
    for o in outs[:5]:
        assert "warmup" in o.flags
        assert not o.reconstructed
        assert o.accepted == o.raw
    assert all("warmup" not in o.flags for o in outs[5:])


# spike handling (regression values frozen from a seed-fixed run)


def test_spike_is_rejected_and_reconstructed():
    stream = _stream()
    faulty = inject(stream, FaultSpec("spike", 80, 1, 16.0))
    outs, reports = _run(faulty.samples)
    spike = outs[80]
    assert spike.reconstructed
    assert spike.confidence == pytest.approx(0.11653886203424144, abs=1e-9)
    # accepted value falls back to the pre-spike estimate
    assert spike.accepted == pytest.approx(199.2471643899927, abs=1e-6)
    assert abs(spike.accepted - 200.0) < 2.0
    assert not outs[79].reconstructed
    assert not outs[81].reconstructed
    assert reports == []  # single sample, far below report_after


def test_estimate_recovers_after_spike():
    stream = _stream()
    faulty = inject(stream, FaultSpec("spike", 80, 1, 16.0))
    outs, _ = _run(faulty.samples)
    tail = outs[85:]
    assert all(not o.reconstructed for o in tail)


# timestamp anomalies


def test_time_regression_is_rejected_and_flagged():
    stream = _stream(n=40)
    samples = list(stream)
    bad = dataclasses.replace(samples[20], timestamp=samples[18].timestamp)
    samples[20] = bad
    v = SensorValidator(PipelineConfig(), "s1")
    outs = [v.step(s) for s in samples]
    o = outs[20]
    assert "time_regression" in o.flags
    assert o.confidence == 0.0
    assert o.reconstructed
    assert o.accepted == pytest.approx(outs[19].accepted, abs=5.0)
    # the rejected sample does not perturb downstream state
    assert not outs[21].reconstructed


def test_zero_interval_is_flagged_not_fatal():
    stream = _stream(n=40)
    samples = list(stream)
    samples[20] = dataclasses.replace(samples[20], timestamp=samples[19].timestamp)
    outs, _ = _run(samples)
    assert "zero_interval" in outs[20].flags
    assert outs[20].confidence > 0.0


def test_out_of_range_reading_is_flagged():
    stream = list(_stream(n=40))
    stream[30] = dataclasses.replace(stream[30], value=900.0)
    outs, _ = _run(stream)
    assert "out_of_range" in outs[30].flags


def test_no_rule_fired_maps_to_zero_confidence():
    # a rulebase with a hole: the only rule needs value near 0
    tri = MembershipFunction.triangular
    hole = FuzzySystem(
        name="hole",
        inputs=(
            LinguisticVariable("value", 0.0, 10.0, (("low", tri(0.0, 1.0, 2.0)),)),
            LinguisticVariable("roc", 0.0, 10.0, (("any", tri(-10.0, 0.0, 20.0)),)),
            LinguisticVariable("std", 0.0, 10.0, (("any", tri(-10.0, 0.0, 20.0)),)),
        ),
        outputs=(
            LinguisticVariable("conf", 0.0, 1.0, (("high", tri(0.5, 1.0, 1.5)),)),
        ),
        rules=(Rule((1, 1, 1), (1,), 1.0, "and"),),
    )
    cfg = PipelineConfig(system=hole, warmup=0)
    v = SensorValidator(cfg, "s")
    out = v.step(Sample(0.0, 8.0))  # far from the lone rule's support
    assert "no_rule_fired" in out.flags
    assert out.confidence == 0.0


# re-anchoring after a sustained level shift


def _shifted_stream(n=80, jump_at=50, level=200.0, to=300.0):
    base = generate(SignalProfile("constant", level=level), n)
    return [
        dataclasses.replace(s, value=to) if i >= jump_at else s
        for i, s in enumerate(base)
    ]


def test_reanchor_escapes_level_shift():
    cfg = PipelineConfig(reanchor_after=10)
    outs, _ = _run(_shifted_stream(), cfg)
    assert all(o.reconstructed for o in outs[50:60])
    assert not outs[60].reconstructed
    assert outs[60].accepted == 300.0
    assert all(not o.reconstructed for o in outs[60:])


def test_reanchor_disabled_rejects_forever():
    cfg = PipelineConfig(reanchor_after=0)
    outs, _ = _run(_shifted_stream(), cfg)
    assert all(o.reconstructed for o in outs[50:])
    assert all(o.accepted == outs[49].accepted for o in outs[50:])


# fault reports


def test_sustained_burst_produces_a_report():
    stream = _stream(n=400, seed=104)
    faulty = inject(stream, FaultSpec("noise_burst", 150, 60, 100.0), seed=9)
    cfg = PipelineConfig()
    outs, reports = _run(faulty.samples, cfg)
    assert len(reports) >= 1
    r = reports[0]
    assert r.sensor_id == "s1"
    assert r.count >= cfg.report_after
    assert 150.0 <= r.start <= r.end <= 400.0
    # saturated episodes repeat one confidence; the mean can sit 1 ulp off
    assert r.min_confidence <= r.mean_confidence + 1e-12
    assert r.mean_confidence < cfg.fault_threshold
    assert r.value_min <= r.value_mean <= r.value_max
    assert r.dominant_flags  # sustained burst trips the detectors too


def test_exactly_report_after_low_samples_yield_one_report():
    tracker = FaultTracker("s", fault_threshold=0.3, report_after=10)
    reports = []
    for i in range(10):
        r = tracker.observe(float(i), 5.0, 0.1, 0)
        assert r is None
    r = tracker.observe(10.0, 5.0, 0.9, 0)
    assert r is not None
    assert r.count == 10
    assert r.start == 0.0
    assert r.end == 9.0
    assert tracker.close() is None


def test_open_episode_flushes_at_finalize():
    tracker = FaultTracker("s", fault_threshold=0.3, report_after=10)
    for i in range(12):
        assert tracker.observe(float(i), 1.0, 0.05, 0) is None
    r = tracker.close()
    assert r is not None and r.count == 12


def test_short_episode_is_dropped():
    tracker = FaultTracker("s", fault_threshold=0.3, report_after=10)
    for i in range(3):
        tracker.observe(float(i), 1.0, 0.05, 0)
    assert tracker.close() is None


def test_tracker_matches_run_length_scanner():
    rng = np.random.default_rng(77)
    for _ in range(200):
        n = int(rng.integers(1, 120))
        confs = rng.uniform(0.0, 1.0, size=n)
        threshold = float(rng.uniform(0.1, 0.9))
        after = int(rng.integers(1, 12))
        tracker = FaultTracker("s", threshold, after)
        got = []
        for i, c in enumerate(confs):
            r = tracker.observe(float(i), 0.0, float(c), 0)
            if r:
                got.append(r)
        r = tracker.close()
        if r:
            got.append(r)
        want = scan_reports(confs, threshold, after)
        assert [(g.start, g.count) for g in got] == [(float(s), l) for s, l in want]


# batch path


def _assert_batch_matches_scalar(samples, config):
    t = np.array([s.timestamp for s in samples])
    v = np.array([s.value for s in samples])
    batch = run_batch(config, t, v, "s1")
    scalar_outs, scalar_reports = _run(samples, config)
    assert len(batch.outcomes()) == len(scalar_outs)
    for got, want in zip(batch.outcomes(), scalar_outs):
        assert got.reconstructed == want.reconstructed
        assert got.flags == want.flags
        assert got.confidence == pytest.approx(want.confidence, abs=1e-9)
        assert got.accepted == pytest.approx(want.accepted, abs=1e-9)
    assert len(batch.reports) == len(scalar_reports)
    for got, want in zip(batch.reports, scalar_reports):
        assert got.sensor_id == want.sensor_id
        assert got.start == want.start
        assert got.end == want.end
        assert got.count == want.count
        assert got.dominant_flags == want.dominant_flags
        assert got.min_confidence == pytest.approx(want.min_confidence, abs=1e-9)
        assert got.mean_confidence == pytest.approx(want.mean_confidence, abs=1e-9)
        assert got.value_mean == pytest.approx(want.value_mean, abs=1e-9)


def test_run_batch_matches_scalar_on_fault_shapes():
    for seed, fault in [
        (201, FaultSpec("spike", 80, 1, 18.0)),
        (202, FaultSpec("noise_burst", 150, 60, 100.0)),
        (203, FaultSpec("stuck_at", 100, 80)),
        (204, FaultSpec("drift", 100, 200, 30.0)),
    ]:
        stream = _stream(n=400, seed=seed)
        faulty = inject(stream, fault, seed=seed)
        _assert_batch_matches_scalar(faulty.samples, PipelineConfig())


def test_run_batch_matches_scalar_with_time_anomalies():
    samples = list(_stream(n=60, seed=205))
    samples[20] = dataclasses.replace(samples[20], timestamp=samples[18].timestamp)
    samples[40] = dataclasses.replace(samples[40], timestamp=samples[39].timestamp)
    _assert_batch_matches_scalar(samples, PipelineConfig())


def test_run_batch_empty_stream():
    batch = run_batch(PipelineConfig(), np.array([]), np.array([]))
    assert batch.outcomes() == []
    assert batch.reports == []


def test_run_batch_rejects_spe_configs():
    rng = np.random.default_rng(1)
    X = np.column_stack([rng.normal(0, 1, 30), rng.normal(0, 1, 30)]) + 5.0
    model = pca_fit(X + np.outer(rng.normal(0, 5, 30), [1.0, 0.8]), 1)
    cfg = PipelineConfig(spe_model=model, spe_fusion=("a", "b"))
    with pytest.raises(ConfigError):
        run_batch(cfg, np.array([0.0]), np.array([1.0]))


# configuration validation


@pytest.mark.parametrize(
    "kwargs",
    [
        {"accept_threshold": 0.2, "fault_threshold": 0.3},
        {"accept_threshold": 1.0},
        {"fault_threshold": 0.0},
        {"reconstruction_alpha": 0.0},
        {"reconstruction_alpha": 1.5},
        {"report_after": 0},
        {"warmup": -1},
        {"window": 1},
        {"reanchor_after": -5},
        {"variance_threshold": -1.0},
    ],
)
def test_config_rejects_bad_settings(kwargs):
    with pytest.raises(ConfigError):
        PipelineConfig(**kwargs).validate()


def test_config_rejects_wrong_arity_system():
    bad = FuzzySystem(
        name="two",
        inputs=(
            LinguisticVariable(
                "a", 0.0, 1.0, (("t", MembershipFunction.gaussian(0.2, 0.5)),)
            ),
        )
        * 2,
        outputs=(
            LinguisticVariable(
                "o", 0.0, 1.0, (("t", MembershipFunction.gaussian(0.2, 0.5)),)
            ),
        ),
        rules=(Rule((1, 1), (1,), 1.0, "and"),),
    )
    with pytest.raises(ConfigError):
        PipelineConfig(system=bad).validate()


# multi-sensor dispatch and SPE fusion


def test_sensors_are_isolated():
    clean = _stream(n=100, seed=301, sensor="a")
    spiky = inject(
        _stream(n=100, seed=302, sensor="b"), FaultSpec("spike", 50, 1, 20.0)
    ).samples
    interleaved = [s for pair in zip(clean, spiky) for s in pair]
    v = Validator(PipelineConfig())
    outs = v.run(interleaved)
    solo, _ = _run(clean, sensor="a")
    from_mixed = [o for o in outs if o.sensor_id == "a"]
    assert from_mixed == solo


def test_spe_fusion_sets_flag_without_touching_confidence():
    rng = np.random.default_rng(44)
    level = rng.normal(100.0, 10.0, size=300)
    calib = np.column_stack(
        [level + rng.normal(0, 0.5, 300), 0.8 * level + rng.normal(0, 0.5, 300)]
    )
    model = pca_fit(calib, 1)

    def _mk_samples():
        out = []
        lvl = 100.0
        for i in range(60):
            a = lvl
            b = 0.8 * lvl if i < 30 else 0.8 * lvl + 40.0  # break correlation
            out.append(Sample(float(i), a, "a"))
            out.append(Sample(float(i), b, "b"))
        return out

    fused = Validator(
        PipelineConfig(spe_model=model, spe_fusion=("a", "b"))
    )
    plain = Validator(PipelineConfig())
    fused_outs = fused.run(_mk_samples())
    plain_outs = plain.run(_mk_samples())
    assert any("spe_trip" in o.flags for o in fused_outs)
    early = [o for o in fused_outs if o.timestamp < 30.0]
    assert all("spe_trip" not in o.flags for o in early)
    # parallel evidence only: confidence identical with and without the model
    assert [o.confidence for o in fused_outs] == [o.confidence for o in plain_outs]


def test_finalize_is_idempotent():
    v = Validator(PipelineConfig())
    stream = inject(
        _stream(n=300, seed=305), FaultSpec("noise_burst", 100, 60, 100.0), seed=1
    )
    v.run(stream.samples)
    first = v.finalize()
    assert v.finalize() == first
