import csv
import io
import json
import math
from pathlib import Path

import numpy as np
import pytest

from pcslearn import bounds
from pcslearn.active import (
    BUDGET,
    EPSILON,
    SampleStream,
    StreamSource,
    batch_iless_run,
    label_complexity_curve,
    label_counts,
    run_active_iless,
    run_batch_iless,
)
from pcslearn.hypotheses import FiniteSpace, LabeledSample, Member, ThresholdSpace
from pcslearn.selective import BATCH_ILESS, classify, exact_abstain_mass
from pcslearn.worlds import example1_world, finite_world, interval_world, threshold_world


CALIBRATION = json.loads((Path(__file__).parent / "fixtures" / "calibration.json").read_text())["limits"]


def _run(world, seed, **kw):
    return run_active_iless(world.space, StreamSource(world, seed), 0.1, **kw)


def test_first_example_is_always_requested():
    for seed in range(10):
        rep = _run(threshold_world(), seed, m=2)
        assert rep.requested[0]
        assert rep.labels_at(1) == 1


def test_stream_hides_labels_until_requested():
    src = StreamSource(threshold_world(), 0)
    x = src.draw(5)
    assert x.shape == (5,) and src.requests == 0
    y = src.request([1, 3])
    assert src.requests == 2 and y.shape == (2,)
    assert np.array_equal(y, threshold_world().clean_labels(x[[1, 3]]))
    chunked = StreamSource(threshold_world(noise=0.2), 1)
    whole = StreamSource(threshold_world(noise=0.2), 1)
    xa = np.concatenate([chunked.draw(3), chunked.draw(7)])
    ya = chunked.request(range(7))
    assert np.array_equal(xa, whole.draw(10))
    assert np.array_equal(ya, whole.request(range(3, 10)))


def test_example1_requests_only_in_the_tails():
    w = example1_world(0.1)
    rep = _run(w, 3, m=2**13)
    # once a committed set holds both members, only the tails are queried
    start = next(r.t for r, g in zip(rep.per_round, rep.committed) if len(g.members()) == 2)
    x = StreamSource(w, 3).draw(2**13)
    later = np.arange(len(x)) >= start
    tails = (x < 0.1) | (x > 0.9)
    assert np.array_equal(rep.requested[later], tails[later])
    late = rep.round_at(2**13)
    assert late.labels_in_round / late.batch_size == pytest.approx(0.2, abs=3 * np.sqrt(0.16 / 2**12))


def test_example1_label_rate_is_one_fifth():
    labels, rates = label_counts(example1_world(0.1).space, example1_world(0.1), 0.1, [2**10, 2**12], 20, 1)
    # binomial CI around 0.2 of the half-batch
    assert np.mean(rates[-1]) == pytest.approx(0.2, abs=3 * np.sqrt(0.16 / (2**11 * 20)))
    assert np.median(labels[-1]) / 2**12 == pytest.approx(0.2, abs=0.03)


def test_single_hypothesis_class_uses_at_most_one_label():
    space = FiniteSpace([Member.threshold(0.5)])
    w = finite_world(space, Member.threshold(0.5), noise=0.2)
    for row in label_complexity_curve(space, w, 0.1, [2, 16, 256], 5, 0):
        assert row.labels_q95 <= 1
    assert _run(w, 0, m=300).labels_requested == 0


@pytest.mark.parametrize("world", [threshold_world(0.3), threshold_world(0.6, 0.1), interval_world(0.2, 0.5, 0.05)])
def test_run_invariants(world):
    for seed in range(5):
        rep = _run(world, seed, m=1000)
        assert rep.labels_requested == sum(req for _, req in rep.label_trace)
        assert [r.t for r in rep.per_round] == [2**k for k in range(1, 10)]
        assert rep.t_final == 1000 and rep.termination == BUDGET
        for r in rep.per_round:
            # the batch behind every update holds the t/2 examples since the last reset
            assert r.batch_size == (2 if r.t == 2 else r.t // 2)
            assert r.delta_round == 0.1 / (2 * r.t)
            assert r.sigma == bounds.sigma_active(r.t, 0.1, world.space.vc_dimension, r.erm_risk)
        assert len(rep.committed) == len(rep.per_round)
        assert rep.final_set is rep.committed[-1]


def test_self_labels_agree_with_every_member():
    w = threshold_world(0.45, noise=0.1)
    for seed in range(5):
        src = StreamSource(w, seed)
        rep = run_active_iless(w.space, src, 0.1, m=512)
        x = StreamSource(w, seed).draw(512)
        # set committed at t labels the examples t+1 .. 2t
        for g, r in zip(rep.committed[:-1], rep.per_round[:-1]):
            seg = np.arange(r.t, 2 * r.t)
            quiet = seg[~rep.requested[seg]]
            if quiet.size == 0:
                continue
            lo, hi = np.clip(g.threshold_range(), -0.1, 1.1)
            grid = np.concatenate([np.linspace(lo, hi, 200), [hi, -np.inf, np.inf]])
            members = [w.space.hypothesis(t) for t in grid if g.contains(w.space.hypothesis(t))]
            preds = np.array([w.space.predict(h, x[quiet]) for h in members])
            assert np.all(preds == g.fabricate(x[quiet]))


def test_target_retained_in_realizable_runs():
    w = threshold_world(0.37)
    failures = 0
    for seed in range(500):
        rep = _run(w, seed, m=512)
        failures += not all(g.contains(w.target) for g in rep.committed)
    assert failures / 500 <= 0.1


def test_label_fraction_at_4096_is_calibrated():
    w = threshold_world()
    labels, _ = label_counts(w.space, w, 0.1, [2**12], 50, 0)
    assert np.mean(labels[0] / 2**12 <= CALIBRATION["label_fraction_q90_m4096"]) >= 0.9
    assert np.all(labels[0] < 2**12)


def test_label_growth_is_calibrated():
    w = threshold_world()
    labels, _ = label_counts(w.space, w, 0.1, [2**10, 2**14], 30, 0)
    assert np.median(labels[1]) / np.median(labels[0]) <= CALIBRATION["label_growth_ratio_2_14_over_2_10"]
    # far below the factor 16 a passive learner pays
    assert np.median(labels[1]) / np.median(labels[0]) < 16


def test_example_count_under_epsilon_termination():
    w = threshold_world(0.62)
    for eps in (0.1, 0.05):
        for seed in range(10):
            rep = _run(w, seed, epsilon=eps)
            assert rep.t_final <= CALIBRATION["example_count_constant"] * (1 / eps) * math.log(1 / eps)


def test_epsilon_termination():
    w = threshold_world(0.5)
    rep = _run(w, 0, epsilon=0.05)
    assert rep.termination == EPSILON
    assert rep.per_round[-1].sigma < 0.05
    assert all(r.sigma >= 0.05 for r in rep.per_round[:-1])
    assert w.true_risk(rep.final_hypothesis) <= 0.05


def test_epsilon_wins_ties_with_budget():
    w = threshold_world(0.5)
    t_eps = _run(w, 0, epsilon=0.05).t_final
    assert _run(w, 0, epsilon=0.05, m=t_eps).termination == EPSILON
    assert _run(w, 0, epsilon=0.05, m=t_eps // 2).termination == BUDGET


def test_budget_between_update_points_keeps_last_set():
    w = threshold_world(0.4, 0.1)
    rep = _run(w, 7, m=300)
    assert rep.t_final == 300 and rep.per_round[-1].t == 256
    assert rep.final_set is rep.committed[-1]
    assert len(rep.requested) == 300


def test_partial_batch_erm():
    # a fixed sample makes the partial-batch ERM checkable
    s = threshold_world(0.5).sample(20, 4)
    rep = run_active_iless(ThresholdSpace(), SampleStream(s), 0.1, m=20)
    tail = LabeledSample(s.x[16:], rep.committed[-1].fabricate(s.x[16:]))
    req = rep.requested[16:]
    y = tail.y.copy()
    y[req] = s.y[16:][req]
    expect, _ = ThresholdSpace().profile(LabeledSample(s.x[16:], y)).erm()
    assert rep.final_hypothesis == expect


def test_argument_errors():
    w = threshold_world()
    with pytest.raises(ValueError):
        _run(w, 0)
    with pytest.raises(ValueError):
        _run(w, 0, epsilon=0.0)
    with pytest.raises(ValueError):
        _run(w, 0, m=1)
    with pytest.raises(ValueError):
        run_active_iless(w.space, StreamSource(w, 0), 1.0, m=4)
    with pytest.raises(ValueError):
        run_batch_iless(w.space, w.sample(1, 0), 0.1, 0)
    with pytest.raises(ValueError):
        label_counts(w.space, w, 0.1, [16, 8], 1, 0)
    with pytest.raises(ValueError):
        label_counts(w.space, w, 0.1, [12], 1, 0)


def test_confidence_budget_partial_sums():
    sums = bounds.confidence_partial_sums(0.1, 20)
    direct = np.cumsum([0.1 / (2 * 2**i) for i in range(1, 21)])
    assert sums == pytest.approx(direct, rel=1e-15)
    assert np.all(sums <= 0.1)


def test_batch_iless_is_deterministic():
    w = threshold_world(0.4, 0.05)
    s = w.sample(500, 2)
    a = run_batch_iless(w.space, s, 0.1, seed=9)
    b = run_batch_iless(w.space, s, 0.1, seed=9)
    assert a.to_json() == b.to_json()
    assert a.predictor.params == b.predictor.params
    assert a.trainer == BATCH_ILESS


def test_batch_iless_abstains_exactly_on_final_disagreement():
    w = threshold_world(0.4, 0.05)
    rng = np.random.default_rng(0)
    for seed in range(10):
        s = w.sample(1024, seed)
        sc, rep = batch_iless_run(w.space, s, 0.1, seed)
        probes = rng.random(100)
        assert np.array_equal(classify(w.space, sc, probes) == 0, rep.final_set.disagrees_at(probes))


def test_batch_iless_abstain_mass_scales_like_its_radius():
    w = threshold_world(0.5)
    m, delta = 4096, 0.1
    assert bounds.batch_r0_radius(m, delta, 1, 0.0) == 44 * (bounds.batch_log_factor_B(m, delta, 1) / m)
    masses = []
    for seed in range(10):
        sc, rep = batch_iless_run(w.space, w.sample(m, seed), delta, seed)
        mass = exact_abstain_mass(w.space, sc, w)
        # theta = 2 for interior thresholds
        assert mass <= 2 * bounds.batch_r0_radius(m, delta, 1, 0.0)
        masses.append(mass)
    # realizable: the final batch is self-consistent, so the span stays well inside the bound
    assert np.median(masses) < 0.5 * 2 * bounds.batch_r0_radius(m, delta, 1, 0.0)


def test_trace_csv_and_record():
    rep = _run(threshold_world(), 1, m=10)
    rows = list(csv.reader(io.StringIO(rep.trace_csv())))
    assert rows[0] == ["t", "requested", "sigma_active_if_updated"]
    assert len(rows) == 11
    assert [r[0] for r in rows[1:] if r[2]] == ["2", "4", "8"]
    assert float(rows[8][2]) == rep.round_at(8).sigma
    rec = json.loads(rep.to_json())
    assert rec["labels_requested"] == rep.labels_requested and rec["termination"] == BUDGET
    assert [r["t"] for r in rec["per_round"]] == [2, 4, 8]
