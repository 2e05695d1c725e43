"""Stream-based Active-ILESS and its batch reduction.

Labels are requested only where the last committed low-error set disagrees;
elsewhere the example is self-labeled with the set's unanimous prediction.
The set is rebuilt at ``t = 2, 4, 8, ...`` from the examples gathered since
the previous rebuild, after which that batch starts over.

Within one round the committed set is fixed, so the whole round is
processed as one vectorized block. Nothing the algorithm does between
update points depends on the examples of the same round.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from . import bounds
from .hypotheses import Hypothesis, HypothesisSpace, LabeledSample
from .selective import BATCH_ILESS, FullClass, LowErrorSet, SelectiveClassifier

EPSILON, BUDGET = "EPSILON", "BUDGET"


class StreamSource:
    """I.i.d. draws from a world; labels stay hidden until requested.

    Instances and label noise come from separate substreams, so the
    sequence does not depend on how draws are chunked.
    """

    def __init__(self, world, seed=None):
        self.world = world
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        self._x_rng, self._y_rng = rng.spawn(2)
        self._x = np.empty(0)
        self._y = np.empty(0, dtype=np.int8)
        self.requests = 0

    def draw(self, n: int) -> np.ndarray:
        """Next ``n`` unlabeled instances."""
        x = self.world.sample_x(n, self._x_rng)
        self._x = x
        self._y = self.world.label(x, self._y_rng)
        return x.copy()

    def request(self, idx) -> np.ndarray:
        """Labels of positions ``idx`` within the latest draw."""
        idx = np.asarray(idx, dtype=np.intp)
        self.requests += idx.size
        return self._y[idx].copy()


class SampleStream(StreamSource):
    """Replays a fixed labeled sample in order."""

    def __init__(self, sample: LabeledSample):
        self.sample = sample
        self.pos = 0
        self._start = 0
        self.requests = 0

    def draw(self, n: int) -> np.ndarray:
        if self.pos + n > len(self.sample):
            raise ValueError("sample stream exhausted")
        self._start = self.pos
        self.pos += n
        return self.sample.x[self._start:self.pos].copy()

    def request(self, idx) -> np.ndarray:
        idx = np.asarray(idx, dtype=np.intp)
        self.requests += idx.size
        return self.sample.y[self._start + idx].copy()


@dataclass(frozen=True)
class Round:
    t: int
    sigma: float
    labels_in_round: int
    batch_size: int
    delta_round: float
    erm_risk: float


@dataclass(eq=False)
class ActiveRunReport:
    final_hypothesis: Hypothesis
    final_set: LowErrorSet
    t_final: int
    labels_requested: int
    per_round: list[Round]
    termination: str
    requested: np.ndarray
    committed: list[LowErrorSet] = field(default_factory=list)

    @property
    def label_trace(self) -> list[tuple[int, bool]]:
        return [(i + 1, bool(r)) for i, r in enumerate(self.requested)]

    def labels_at(self, t: int) -> int:
        """Labels requested among the first ``t`` examples."""
        return int(np.count_nonzero(self.requested[:t]))

    def round_at(self, t: int) -> Round:
        for rnd in self.per_round:
            if rnd.t == t:
                return rnd
        raise KeyError(t)

    def to_record(self) -> dict:
        return {
            "final_hypothesis": list(self.final_hypothesis.params),
            "final_set": self.final_set.to_record(),
            "t_final": self.t_final,
            "labels_requested": self.labels_requested,
            "termination": self.termination,
            "per_round": [vars(r).copy() for r in self.per_round],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    def trace_csv(self) -> str:
        sigma = {r.t: r.sigma for r in self.per_round}
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "requested", "sigma_active_if_updated"])
        for i, req in enumerate(self.requested):
            t = i + 1
            w.writerow([t, int(req), repr(sigma[t]) if t in sigma else ""])
        return buf.getvalue()


def run_active_iless(space: HypothesisSpace, stream: StreamSource, delta: float,
                     epsilon: float | None = None, m: int | None = None) -> ActiveRunReport:
    if epsilon is None and m is None:
        raise ValueError("give epsilon, m, or both")
    if epsilon is not None and not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if m is not None and not (int(m) == m and m >= 2):
        raise ValueError("budget m must be an integer >= 2")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    d = space.vc_dimension

    g = FullClass(space)
    committed: list[LowErrorSet] = []
    rounds: list[Round] = []
    trace: list[np.ndarray] = []
    bx: list[np.ndarray] = []
    by: list[np.ndarray] = []
    t = 0
    next_update = 2
    while True:
        end = next_update if m is None else min(next_update, int(m))
        x = stream.draw(end - t)
        ask = g.disagrees_at(x)
        y = g.fabricate(x)
        y[ask] = stream.request(np.flatnonzero(ask))
        bx.append(x)
        by.append(y)
        trace.append(ask)
        t = end
        batch = LabeledSample(np.concatenate(bx), np.concatenate(by))
        prof = space.profile(batch)
        f_hat, count = prof.erm()

        if t == next_update:
            r_hat = count / len(batch)
            sigma = bounds.sigma_active(t, delta, d, r_hat)
            rounds.append(Round(t, sigma, int(np.count_nonzero(ask)), len(batch), delta / (2 * t), r_hat))
            g_new = LowErrorSet(space, batch, f_hat, r_hat, sigma)
            object.__setattr__(g_new, "profile", prof)
            if epsilon is not None and sigma < epsilon:
                return _report(f_hat, g_new, t, trace, rounds, EPSILON, committed)
            g = g_new
            committed.append(g)
            bx, by = [], []
            next_update *= 2
            if m is not None and t >= m:
                return _report(f_hat, g, t, trace, rounds, BUDGET, committed)
        elif m is not None and t >= m:
            # between update points: fresh ERM, last committed set
            return _report(f_hat, g, t, trace, rounds, BUDGET, committed)


def _report(f_hat, g, t, trace, rounds, termination, committed):
    requested = np.concatenate(trace).astype(bool)
    return ActiveRunReport(f_hat, g, t, int(requested.sum()), rounds, termination,
                           requested, list(committed))


def batch_iless_run(space, sample: LabeledSample, delta: float, seed=None):
    """Batch-ILESS plus the active run it simulates."""
    if len(sample) < 2:
        raise ValueError("Batch-ILESS needs at least two examples")
    perm = np.random.default_rng(seed).permutation(len(sample))
    report = run_active_iless(space, SampleStream(sample.take(perm)), delta, m=len(sample))
    sc = SelectiveClassifier(report.final_hypothesis, report.final_set, BATCH_ILESS)
    return sc, report


def run_batch_iless(space, sample: LabeledSample, delta: float, seed=None) -> SelectiveClassifier:
    return batch_iless_run(space, sample, delta, seed)[0]


@dataclass(frozen=True)
class CurveRow:
    m: int
    labels_mean: float
    labels_median: float
    labels_q05: float
    labels_q95: float
    rate_mean: float
    rate_median: float
    rate_q05: float
    rate_q95: float


def label_counts(space, world, delta, m_grid, trials, seed) -> tuple[np.ndarray, np.ndarray]:
    """Per-trial label counts and final-round request rates at each budget.

    Active-ILESS is online, so a run with budget ``max(m_grid)`` passes
    through the exact state of every shorter run on the same stream; one run
    per trial serves the whole grid.
    """
    m_grid = [int(v) for v in m_grid]
    if not m_grid or any(v < 2 or v & (v - 1) for v in m_grid) or m_grid != sorted(set(m_grid)):
        raise ValueError("m_grid must be ascending powers of two >= 2")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    labels = np.zeros((len(m_grid), trials))
    rates = np.zeros((len(m_grid), trials))
    for j in range(trials):
        stream = StreamSource(world, np.random.default_rng([seed, j]))
        rep = run_active_iless(space, stream, delta, m=m_grid[-1])
        for i, mm in enumerate(m_grid):
            labels[i, j] = rep.labels_at(mm)
            rnd = rep.round_at(mm)
            rates[i, j] = rnd.labels_in_round / rnd.batch_size
    return labels, rates


def label_complexity_curve(space, world, delta, m_grid, trials, seed) -> list[CurveRow]:
    labels, rates = label_counts(space, world, delta, m_grid, trials, seed)
    rows = []
    for i, mm in enumerate(m_grid):
        lq = np.quantile(labels[i], [0.05, 0.5, 0.95])
        rq = np.quantile(rates[i], [0.05, 0.5, 0.95])
        rows.append(CurveRow(int(mm), float(labels[i].mean()), float(lq[1]), float(lq[0]), float(lq[2]),
                             float(rates[i].mean()), float(rq[1]), float(rq[0]), float(rq[2])))
    return rows
