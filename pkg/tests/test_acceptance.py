"""The ten acceptance criteria, each at its stated scale and tolerance.

Run ``pytest tests/test_acceptance.py`` and read the "acceptance criteria"
section of the summary for one PASS/FAIL line per criterion.
"""
import math
import time

import mpmath
import numpy as np
import pytest

from pcslearn import bounds, disagreement, harness, selective
from pcslearn.active import EPSILON, StreamSource, run_active_iless
from pcslearn.regions import PiecewiseUniform
from pcslearn.worlds import example1_world, finite_world, interval_world, threshold_world

SKEWED = PiecewiseUniform(((0.0, 0.3, 0.6), (0.5, 1.0, 0.4)))


def _config(experiment, algorithm, m_grid, delta, trials, world, seed=0, **options):
    return harness.ExperimentConfig(experiment, world, algorithm, list(m_grid), delta, None, trials, seed,
                                    options={k: str(v) for k, v in options.items()}).validate()


def test_01_two_predictor_world(criterion):
    started = time.perf_counter()
    world = example1_world(0.1)
    f1, f2 = world.space.hypotheses()
    hits = 0
    for trial in range(200):
        sample = world.sample(2000, harness.trial_rng(1, 2000, trial))
        sc = selective.train_iless(world.space, sample, 0.1)
        both = sc.low_error_set.contains(f1) and sc.low_error_set.contains(f2)
        mass = selective.exact_abstain_mass(world.space, sc, world)
        # float sums of cdf differences land within an ulp or two of 0.2
        hits += both and abs(mass - 0.2) <= 1e-12
    _, r_star = world.all_true_minimizers()
    elapsed = time.perf_counter() - started
    ok = hits / 200 >= 0.9 and r_star == pytest.approx(0.1, abs=1e-15) and elapsed < 30
    assert criterion(1, "two-predictor world reproduction", ok,
                     f"{hits}/200 trials keep both predictors with abstain mass 0.200; R*={r_star:.3f}; {elapsed:.1f}s")


def test_02_pointwise_competitive(criterion):
    started = time.perf_counter()
    cfg = _config(harness.COMPETITIVE_CHECK, harness.ILESS, [64, 256], 0.2, 500, {"kind": "threshold"})
    rep = harness.run(cfg)
    v = rep.verdict("pointwise-competitive")
    rates = [c["disagreement_rate"] for c in rep.cells]
    elapsed = time.perf_counter() - started
    ok = v.passed and v.limit == harness.frequency_limit(0.2, 500) and elapsed < 60
    assert criterion(2, "pointwise competitiveness", ok,
                     f"covered-disagreement rates {rates} vs limit {v.limit:.4f}; {elapsed:.1f}s")


@pytest.fixture(scope="module")
def audit_report():
    started = time.perf_counter()
    cfg = _config(harness.BOUND_AUDIT, harness.ILESS, [2000], 0.1, 300,
                  {"kind": "threshold", "threshold": "0.5", "noise": "0.1"}, seed=3)
    rep = harness.run(cfg)
    return rep, time.perf_counter() - started


def test_03_radius_cap(criterion, audit_report):
    rep, elapsed = audit_report
    e_freq, cap = rep.verdict("event-e-frequency"), rep.verdict("radius-cap")
    m, delta = 2000, 0.1
    a = bounds.log_factor_A(m, delta, 1)
    expected_cap = 6 * a / m + 3 * math.sqrt(a * 0.1 / m)
    rows = rep.tables["trials"]
    in_e = [r for r in rows if r["event_e"]]
    recomputed = all(r["radius"] <= expected_cap for r in in_e)
    ok = (e_freq.passed and cap.passed and recomputed and rep.cells[0]["radius_cap"] == pytest.approx(expected_cap)
          and elapsed < 120)
    assert criterion(3, "radius cap audit", ok,
                     f"cap held in {int(cap.observed)}/{int(cap.limit)} event trials; "
                     f"event failure {e_freq.observed:.3f} <= {e_freq.limit:.3f}; {elapsed:.1f}s")


def test_04_abstain_bound(criterion, audit_report):
    rep, elapsed = audit_report
    v = rep.verdict("abstain-bound")
    world = threshold_world(0.5, 0.1)
    r0 = bounds.r0_radius(2000, 0.1, 1, 0.1)
    bound = disagreement.theta_f(world.space, world, world.target, r0).value * r0
    rows = [r for r in rep.tables["trials"] if r["event_e"]]
    recomputed = all(r["abstain_mass"] <= bound for r in rows)
    ok = v.passed and recomputed and rows[0]["abstain_bound"] == pytest.approx(bound) and elapsed < 120
    assert criterion(4, "abstain bound", ok,
                     f"abstain <= {bound:.4f} in {int(v.observed)}/{int(v.limit)} event trials")


def test_05_active_batch_equivalence(criterion):
    started = time.perf_counter()
    cfg = _config(harness.EQUIVALENCE_CHECK, harness.BATCH, [1024], 0.1, 50,
                  {"kind": "threshold", "threshold": "0.4", "noise": "0.1"}, probes=100)
    rep = harness.run(cfg)
    v = rep.verdict("batch-equals-final-dis")
    elapsed = time.perf_counter() - started
    ok = v.passed and v.observed == 5000 and elapsed < 60
    assert criterion(5, "active/batch equivalence", ok, f"{int(v.observed)}/5000 probes agree; {elapsed:.1f}s")


def test_06_label_complexity(criterion):
    started = time.perf_counter()
    cfg = _config(harness.LABEL_CURVE, harness.ACTIVE, [2**k for k in range(8, 15)], 0.1, 30,
                  {"kind": "threshold"})
    rep = harness.run(cfg)
    sub, rate = rep.verdict("sublinear"), rep.verdict("rate-nonincreasing")
    elapsed = time.perf_counter() - started
    medians = [c["labels_median"] for c in rep.cells]
    ok = sub.passed and rate.passed and elapsed < 180
    assert criterion(6, "label-complexity decay", ok,
                     f"median labels {medians}; ratio {sub.observed:.4f} <= {sub.limit:.4f}; {elapsed:.1f}s")


def test_07_epsilon_guarantee(criterion):
    started = time.perf_counter()
    world = threshold_world(0.5)
    good = 0
    for run in range(200):
        rep = run_active_iless(world.space, StreamSource(world, [7, run]), 0.1, epsilon=0.05)
        assert rep.termination == EPSILON
        good += world.true_risk(rep.final_hypothesis) <= world.r_star + 0.05
    elapsed = time.perf_counter() - started
    ok = good / 200 >= 0.9 and elapsed < 120
    assert criterion(7, "epsilon guarantee", ok, f"{good}/200 runs within epsilon; {elapsed:.1f}s")


def test_08_theta_oracles(criterion):
    started = time.perf_counter()
    world = threshold_world(0.5)
    analytic = disagreement.theta_f(world.space, world, world.target, 0.01).value
    mc = disagreement.theta_f(world.space, world, world.target, 0.01, method=disagreement.MONTE_CARLO,
                              n=100_000, seed=0).value
    worlds = [world, threshold_world(0.3, 0.1, SKEWED), interval_world(0.3, 0.7),
              interval_world(0.2, 0.8, 0.1, SKEWED), example1_world(0.1)]
    single = finite_world(example1_world(0.1).space, example1_world(0.1).space.members[0])
    monotone = True
    for w in worlds + [single]:
        for f in w.all_true_minimizers()[0]:
            est = disagreement.theta_f(w.space, w, f, 0.01, points=64)
            monotone &= bool(np.all(np.diff(est.theta_at * est.r_grid) <= 1e-12))
    elapsed = time.perf_counter() - started
    ok = analytic == 2.0 and abs(mc - 2.0) <= 0.05 and monotone and elapsed < 30
    assert criterion(8, "theta oracle agreement", ok,
                     f"analytic {analytic!r}, Monte Carlo {mc:.4f}, theta*r monotone: {monotone}; {elapsed:.1f}s")


def test_09_chernoff(criterion):
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    draws = 100_000
    violations = []
    # heterogeneous Poisson trials
    p = rng.uniform(0.05, 0.5, 60)
    mu = p.sum()
    x = (rng.random((draws, p.size)) < p).sum(axis=1)
    for alpha in (0.2, 0.5, 1.0):
        freq = np.mean(x < (1 - alpha) * mu)
        if freq > bounds.chernoff_lower_tail(mu, alpha):
            violations.append(("lower", alpha, freq))
    q = rng.uniform(0.02, 0.18, 30)
    q *= 3.0 / q.sum()
    y = (rng.random((draws, q.size)) < q).sum(axis=1)
    alpha = 5.0
    freq_up = np.mean(y > (1 + alpha) * 3.0)
    if freq_up > bounds.chernoff_upper_tail(3.0, alpha):
        violations.append(("upper", alpha, freq_up))
    elapsed = time.perf_counter() - started
    ok = not violations and elapsed < 30
    assert criterion(9, "Chernoff tail bounds", ok, f"{len(violations)} violations over 4 checks; {elapsed:.1f}s")


# high-precision oracles, written from the formulas independently of the package
mp = mpmath.mp


def _A(m, delta, d):
    return 4 * d * mpmath.log(16 * m * mpmath.e / (d * mpmath.mpf(delta)))


def _B(m, delta, d):
    return 4 * d * mpmath.log(8 * mpmath.mpf(m) ** 2 * mpmath.e / (d * mpmath.mpf(delta)))


def _sigma_iless(m, delta, d, r):
    a = _A(m, delta, d) / m
    r = mpmath.mpf(r)
    up = a + mpmath.sqrt(a * r)
    return up + a + mpmath.sqrt(a * (r + up))


def _sigma_less(m, delta, d):
    return 2 * mpmath.sqrt((2 * d * mpmath.log(2 * m * mpmath.e / d) + mpmath.log(2 / mpmath.mpf(delta))) / m)


ORACLES = {
    "log_factor_A": (lambda m, de, d, r, s: _A(m, de, d),
                     lambda m, de, d, r, s: bounds.log_factor_A(m, de, d)),
    "slack_hat_upper": (lambda m, de, d, r, s: _A(m, de, d) / m + mpmath.sqrt(_A(m, de, d) / m * r),
                        lambda m, de, d, r, s: bounds.slack_hat_upper(m, de, d, r)),
    "slack_bar_upper": (lambda m, de, d, r, s: mpmath.sqrt(_A(m, de, d) / m * s),
                        lambda m, de, d, r, s: bounds.slack_bar_upper(m, de, d, s)),
    "slack_hat_lower": (lambda m, de, d, r, s: mpmath.sqrt(_A(m, de, d) / m * r),
                        lambda m, de, d, r, s: bounds.slack_hat_lower(m, de, d, r)),
    "slack_bar_lower": (lambda m, de, d, r, s: _A(m, de, d) / m + mpmath.sqrt(_A(m, de, d) / m * s),
                        lambda m, de, d, r, s: bounds.slack_bar_lower(m, de, d, s)),
    "slack_true_minus_emp": (
        lambda m, de, d, r, s: min(_A(m, de, d) / m + mpmath.sqrt(_A(m, de, d) / m * r),
                                   mpmath.sqrt(_A(m, de, d) / m * s)),
        lambda m, de, d, r, s: bounds.slack_true_minus_emp(m, de, d, s, r)),
    "slack_emp_minus_true": (
        lambda m, de, d, r, s: min(_A(m, de, d) / m + mpmath.sqrt(_A(m, de, d) / m * s),
                                   mpmath.sqrt(_A(m, de, d) / m * r)),
        lambda m, de, d, r, s: bounds.slack_emp_minus_true(m, de, d, s, r)),
    "sigma_less": (lambda m, de, d, r, s: _sigma_less(m, de, d),
                   lambda m, de, d, r, s: bounds.sigma_less(m, de, d)),
    "less_radius": (lambda m, de, d, r, s: 2 * _sigma_less(m, mpmath.mpf(de) / 4, d),
                    lambda m, de, d, r, s: bounds.less_radius(m, de, d)),
    "sigma_iless": (lambda m, de, d, r, s: _sigma_iless(m, de, d, r),
                    lambda m, de, d, r, s: bounds.sigma_iless(m, de, d, r)),
    "sigma_active": (lambda m, de, d, r, s: _sigma_iless(m, mpmath.mpf(de) / (4 * m), d, r),
                     lambda m, de, d, r, s: bounds.sigma_active(2 * m, de, d, r)),
    "iless_radius_cap": (lambda m, de, d, r, s: 6 * _A(m, de, d) / m + 3 * mpmath.sqrt(_A(m, de, d) * s / m),
                         lambda m, de, d, r, s: bounds.iless_radius_cap(m, de, d, s)),
    "r0_radius": (lambda m, de, d, r, s: 2 * s + 11 * _A(m, de, d) / m + 6 * mpmath.sqrt(_A(m, de, d) * s / m),
                  lambda m, de, d, r, s: bounds.r0_radius(m, de, d, s)),
    "r0_radius_cap": (lambda m, de, d, r, s: 5 * s + 14 * _A(m, de, d) / m,
                      lambda m, de, d, r, s: bounds.r0_radius_cap(m, de, d, s)),
    "batch_log_factor_B": (lambda m, de, d, r, s: _B(m, de, d),
                           lambda m, de, d, r, s: bounds.batch_log_factor_B(m, de, d)),
    "batch_r0_radius": (lambda m, de, d, r, s: 2 * s + 44 * _B(m, de, d) / m + 12 * mpmath.sqrt(_B(m, de, d) * s / m),
                        lambda m, de, d, r, s: bounds.batch_r0_radius(m, de, d, s)),
    "active_label_bound": (
        lambda m, de, d, r, s: (2 * s * 2 * mpmath.e * m * s + mpmath.log(2 / mpmath.mpf(2 * de), 2)
                                + 56 * mpmath.e * mpmath.log(m, 2) * _A(m, 2 * mpmath.mpf(de), d) * 2 * s),
        lambda m, de, d, r, s: bounds.active_label_bound(m, de, d, s, 2 * s)),
    "chernoff_lower_tail": (lambda m, de, d, r, s: mpmath.exp(-(m % 200) * mpmath.mpf(r) ** 2 / 2),
                            lambda m, de, d, r, s: bounds.chernoff_lower_tail(m % 200, r)),
    "chernoff_upper_tail": (lambda m, de, d, r, s: mpmath.power(2, -(m % 50 + 1) * (mpmath.mpf(s) + 5)),
                            lambda m, de, d, r, s: bounds.chernoff_upper_tail(m % 50 + 1, s + 5)),
    "chernoff_lower_alpha": (lambda m, de, d, r, s: mpmath.sqrt(2 * mpmath.log(1 / mpmath.mpf(de)) / m),
                             lambda m, de, d, r, s: bounds.chernoff_lower_alpha(m, de)),
    "request_mass_upper": (
        lambda m, de, d, r, s: (mpmath.sqrt(mpmath.log(1 / mpmath.mpf(de)))
                                + mpmath.sqrt(mpmath.log(1 / mpmath.mpf(de)) + 2 * (m // 3))) ** 2 / (2 * m),
        lambda m, de, d, r, s: bounds.request_mass_upper(m // 3, m, de)),
}


def test_10_bound_algebra(criterion):
    started = time.perf_counter()
    mp.dps = 40
    rng = np.random.default_rng(10)
    inputs = [(int(rng.integers(1, 10**6)), float(rng.uniform(1e-6, 0.45)), int(rng.integers(1, 8)),
               float(rng.uniform(0, 1)), float(rng.uniform(0, 1))) for _ in range(100)]
    worst, worst_name = 0.0, ""
    for name, (oracle, impl) in ORACLES.items():
        for args in inputs:
            want = oracle(*args)
            got = impl(*args)
            err = float(abs(got - want) / abs(want)) if want != 0 else abs(got)
            if err > worst:
                worst, worst_name = err, name
    sums = bounds.confidence_partial_sums(0.1, 20)
    want_sums = [mpmath.fsum(mpmath.mpf(0.1) / (2 * mpmath.mpf(2) ** i) for i in range(1, k + 1)) for k in range(1, 21)]
    worst = max(worst, max(float(abs(g - w) / w) for g, w in zip(sums, want_sums)))
    collapse = all(bounds.sigma_iless(m, de, d, 0.0) == 3 * (bounds.log_factor_A(m, de, d) / m)
                   for m, de, d, _, _ in inputs)
    mins = all(bounds.slack_true_minus_emp(m, de, d, s, r) == min(bounds.slack_hat_upper(m, de, d, r),
                                                                bounds.slack_bar_upper(m, de, d, s))
               and bounds.slack_emp_minus_true(m, de, d, s, r) == min(bounds.slack_bar_lower(m, de, d, s),
                                                                      bounds.slack_hat_lower(m, de, d, r))
               for m, de, d, r, s in inputs)
    elapsed = time.perf_counter() - started
    ok = worst <= 1e-10 and collapse and mins and elapsed < 5
    assert criterion(10, "bound algebra", ok,
                     f"{len(ORACLES) + 1} formulas, worst relative error {worst:.2e} ({worst_name}); "
                     f"zero-risk collapse exact: {collapse}; min-compositions exact: {mins}; {elapsed:.1f}s")
