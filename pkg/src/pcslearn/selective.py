"""Selective classifiers whose reject region is the disagreement set of a
low-error set of hypotheses (LESS, ILESS and the batch variant).

Membership of ``x`` in the disagreement set is decided per query by the
disbelief test: force the label at ``x`` to disagree with the pivot and ask
whether the best such hypothesis is still inside the low-error budget.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import bounds, regions
from .hypotheses import (
    INF,
    FiniteSpace,
    Hypothesis,
    HypothesisSpace,
    LabeledSample,
    ThresholdSpace,
    UnsupportedError,
    _as_instances,
)

ABSTAIN = 0
LESS, ILESS, BATCH_ILESS = "LESS", "ILESS", "BATCH-ILESS"

# slack on count comparisons: risks are count/m while radii are floats
_COUNT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LowErrorSet:
    """Hypotheses whose empirical risk is within ``radius`` of the pivot's."""

    space: HypothesisSpace
    sample: LabeledSample
    pivot: Hypothesis
    pivot_risk: float
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        count = self.space.mistakes(self.pivot, self.sample)
        if count != round(self.pivot_risk * len(self.sample)):
            raise ValueError("pivot_risk does not match the pivot's empirical risk")

    @classmethod
    def around(cls, space, sample, pivot, radius) -> LowErrorSet:
        return cls(space, sample, pivot, space.mistakes(pivot, sample) / len(sample), radius)

    @cached_property
    def profile(self):
        return self.space.profile(self.sample)

    @property
    def m(self) -> int:
        return len(self.sample)

    @cached_property
    def pivot_count(self) -> int:
        return self.space.mistakes(self.pivot, self.sample)

    @property
    def count_budget(self) -> float:
        return self.pivot_count + self.radius * self.m + _COUNT_TOL

    def contains(self, h: Hypothesis) -> bool:
        return self.space.mistakes(h, self.sample) <= self.count_budget

    def disagrees_at(self, x) -> np.ndarray:
        """Disbelief test, vectorized over ``x``."""
        x = _as_instances(x)
        flipped = -np.asarray(self.space.predict(self.pivot, x))
        return self.profile.constrained_counts(x, flipped) <= self.count_budget

    def fabricate(self, x) -> np.ndarray:
        """Label for points in the agreement set: every member agrees with the pivot there."""
        return np.asarray(self.space.predict(self.pivot, x), dtype=np.int8)

    def breakpoints(self) -> np.ndarray:
        """Points between which disagreement membership is constant."""
        return np.concatenate([self.profile.breakpoints(),
                               regions.breakpoints(self.space.positive_region(self.pivot))])

    def threshold_range(self) -> tuple[float, float]:
        """Threshold-class set as the parameter span ``(lo, hi]`` of its member pieces."""
        if not isinstance(self.space, ThresholdSpace):
            raise UnsupportedError("parameter range is only kept for thresholds")
        prof = self.profile
        inside = np.flatnonzero(prof.counts <= self.count_budget)
        lo = prof.piece_bounds(int(inside[0]))[0]
        hi = prof.piece_bounds(int(inside[-1]))[1]
        return lo, hi

    def members(self) -> list[Hypothesis]:
        """Canonical members (exact for finite classes)."""
        hyps, counts = self.profile.canonical()
        return [h for h, c in zip(hyps, counts) if c <= self.count_budget]

    def to_record(self) -> dict:
        return {
            "kind": self.space.kind,
            "pivot": list(self.pivot.params),
            "pivot_risk": self.pivot_risk,
            "radius": self.radius,
            "m": self.m,
            "sample_digest": self.sample.digest(),
        }


@dataclass(frozen=True, eq=False)
class FullClass:
    """The whole class, used before the first active-learning update."""

    space: HypothesisSpace

    def disagrees_at(self, x) -> np.ndarray:
        return np.asarray(self.space.realizes_both(_as_instances(x)), dtype=bool)

    def fabricate(self, x) -> np.ndarray:
        return np.asarray(self.space.predict(self.space.default_hypothesis(), x), dtype=np.int8)

    def contains(self, h) -> bool:
        self.space.check(h)
        return True

    def to_record(self) -> dict:
        return {"kind": self.space.kind, "all": True}


@dataclass(frozen=True, eq=False)
class SelectiveClassifier:
    predictor: Hypothesis
    low_error_set: LowErrorSet
    trainer: str

    def __post_init__(self):
        # Batch-ILESS predicts with the final ERM, which need not be the pivot
        if self.trainer != BATCH_ILESS and self.predictor != self.low_error_set.pivot:
            raise ValueError("predictor must be the low-error set's pivot")

    @property
    def space(self) -> HypothesisSpace:
        return self.low_error_set.space

    def abstains(self, x) -> np.ndarray:
        return self.low_error_set.disagrees_at(x)

    def classify_many(self, x) -> np.ndarray:
        x = _as_instances(x)
        pred = np.asarray(self.space.predict(self.predictor, x), dtype=np.int8)
        return np.where(self.abstains(x), ABSTAIN, pred).astype(np.int8)

    def to_record(self) -> dict:
        return {"trainer": self.trainer, "predictor": list(self.predictor.params),
                **self.low_error_set.to_record()}

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def train_less(space: HypothesisSpace, sample: LabeledSample, delta: float) -> SelectiveClassifier:
    prof = space.profile(sample)
    pivot, count = prof.erm()
    radius = bounds.less_radius(len(sample), delta, space.vc_dimension)
    g = LowErrorSet(space, sample, pivot, count / len(sample), radius)
    object.__setattr__(g, "profile", prof)
    return SelectiveClassifier(pivot, g, LESS)


def train_iless(space: HypothesisSpace, sample: LabeledSample, delta: float) -> SelectiveClassifier:
    prof = space.profile(sample)
    pivot, count = prof.erm()
    r_hat = count / len(sample)
    radius = bounds.sigma_iless(len(sample), delta, space.vc_dimension, r_hat)
    g = LowErrorSet(space, sample, pivot, r_hat, radius)
    object.__setattr__(g, "profile", prof)
    return SelectiveClassifier(pivot, g, ILESS)


def with_radius(sc: SelectiveClassifier, radius: float) -> SelectiveClassifier:
    """Same classifier with its low-error radius replaced (for negative controls)."""
    g = sc.low_error_set
    return SelectiveClassifier(sc.predictor, LowErrorSet(g.space, g.sample, g.pivot, g.pivot_risk, radius),
                               sc.trainer)


def classify(space: HypothesisSpace, sc: SelectiveClassifier, x) -> int:
    """+1 or -1, or ``ABSTAIN`` (0) where the low-error set disagrees."""
    if not _same_class(space, sc.space):
        raise ValueError("classifier was trained on a different class")
    out = sc.classify_many(np.atleast_1d(x))
    return int(out[0]) if np.ndim(x) == 0 else out


def empirical_coverage(space, sc: SelectiveClassifier, sampler, n: int, seed=None) -> float:
    """Monte-Carlo coverage; ``sampler(n, rng)`` draws instances."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    x = sampler(n, rng)
    return float(np.mean(~sc.abstains(x)))


def disagreement_mass(g, world) -> float:
    """Exact marginal mass of the disagreement set of ``g``.

    Membership is constant on each open cell between consecutive breakpoints
    (sample points, the pivot's edges, finite members' edges, marginal
    edges), so one midpoint per cell decides it.
    """
    if isinstance(g, FullClass):
        pts = g.space.breakpoints() if isinstance(g.space, FiniteSpace) else np.empty(0)
    else:
        pts = g.breakpoints()
        if isinstance(g.space, FiniteSpace):
            pts = np.concatenate([pts, g.space.breakpoints()])
    pts = np.concatenate([pts, world.marginal.edges])
    lo, hi = world.marginal.support
    c = regions.cells(pts, lo, hi)
    dis = g.disagrees_at(c.mean(axis=1))
    return float(np.sum(world.marginal.interval_mass(c[dis, 0], c[dis, 1])))


def _same_class(a: HypothesisSpace, b: HypothesisSpace) -> bool:
    return a.kind == b.kind and getattr(a, "members", None) == getattr(b, "members", None)


def exact_abstain_mass(space: HypothesisSpace, sc: SelectiveClassifier, world) -> float:
    if not (_same_class(space, sc.space) and _same_class(space, world.space)):
        raise UnsupportedError("classifier, class and world must share a hypothesis class")
    return disagreement_mass(sc.low_error_set, world)


def threshold_abstain_mass(sc: SelectiveClassifier, world) -> float:
    """Abstain mass of a threshold classifier from its parameter range alone."""
    lo, hi = sc.low_error_set.threshold_range()
    return float(world.marginal.interval_mass(max(lo, -INF), min(hi, INF)))


def brute_force_disagreement(g: LowErrorSet, x) -> np.ndarray:
    """Disagreement membership by enumerating every piece of the set.

    Each piece of constant empirical risk is a parameter box; ``x`` is in
    the disagreement region when some in-budget box can put ``x`` on the
    positive side and some in-budget box can put it on the negative side.
    """
    x = _as_instances(x)
    prof = g.profile
    budget = g.count_budget
    if isinstance(g.space, FiniteSpace):
        inside = prof.counts <= budget
        preds = g.space.prediction_matrix(x)[inside]
        return (preds == 1).any(axis=0) & (preds == -1).any(axis=0)
    u = np.concatenate([[-INF], prof.u, [INF]])
    if isinstance(g.space, ThresholdSpace):
        k = np.flatnonzero(prof.counts <= budget)
        lo, hi = u[k], u[k + 1]
        can_pos = (lo[:, None] < x[None, :]).any(axis=0)
        can_neg = (hi[:, None] > x[None, :]).any(axis=0)
        return can_pos & can_neg
    # intervals: left end in (u[i], u[i+1]], right end in [u[k], u[k+1]), covering values i..k-1;
    # i == k is an interval strictly inside one gap
    n = prof.n
    i, k = np.triu_indices(n + 1)
    counts = prof.total_pos + prof.s[k] - prof.s[i]
    keep = counts <= budget
    i, k = i[keep], k[keep]
    can_pos = ((u[i][:, None] < x[None, :]) & (u[k + 1][:, None] > x[None, :])).any(axis=0)
    can_neg = ((u[i + 1][:, None] > x[None, :]) | (u[k][:, None] < x[None, :])).any(axis=0)
    if prof.total_pos <= budget:
        # the empty interval is in the set and is negative everywhere
        can_neg = np.ones_like(can_neg)
    return can_pos & can_neg
