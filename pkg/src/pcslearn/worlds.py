"""Sampleable 1-D distributions with analytic risk minimizers.

A world pairs a piecewise-uniform marginal with a labeler: a target region
(where the clean label is +1) plus uniform label-flip noise at rate ``eta``.
True risks are then ``eta + (1 - 2 eta) * P(h != target)``, computed exactly
from interval geometry.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import regions
from .hypotheses import (
    NEGATIVE,
    POSITIVE,
    FiniteSpace,
    Hypothesis,
    HypothesisSpace,
    IntervalSpace,
    LabeledSample,
    Member,
    ThresholdSpace,
    UnsupportedError,
)

MINIMIZER_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SyntheticWorld:
    name: str
    space: HypothesisSpace
    marginal: regions.PiecewiseUniform
    target: Hypothesis | None = None
    target_member: Member | None = None
    noise: float = 0.0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0 <= self.noise < 0.5:
            raise ValueError("flip rate must lie in [0, 0.5)")
        if (self.target is None) == (self.target_member is None):
            raise ValueError("give exactly one of target, target_member")
        if self.target is not None:
            self.space.check(self.target)
        object.__setattr__(self, "_truth", self._compute_truth())

    # labeler

    @property
    def target_region(self) -> regions.Region:
        if self.target is not None:
            return self.space.positive_region(self.target)
        return self.target_member.region

    def clean_labels(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.target is not None:
            return np.asarray(self.space.predict(self.target, x), dtype=np.int8)
        return np.where(self.target_member.positive(x), POSITIVE, NEGATIVE).astype(np.int8)

    def sample_x(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return self.marginal.sample(n, rng)

    def label(self, x, rng: np.random.Generator) -> np.ndarray:
        y = self.clean_labels(x)
        if self.noise > 0:
            flip = rng.random(y.shape) < self.noise
            y = np.where(flip, -y, y).astype(np.int8)
        return y

    def sample(self, n: int, seed=None) -> LabeledSample:
        if n < 1:
            raise ValueError("sample size must be >= 1")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        x = self.sample_x(n, rng)
        return LabeledSample(x, self.label(x, rng))

    # ground truth

    def disagreement_mass(self, h1: Hypothesis, h2: Hypothesis) -> float:
        return regions.symmetric_difference_mass(
            self.marginal, self.space.positive_region(h1), self.space.positive_region(h2))

    def true_risk(self, h: Hypothesis) -> float:
        self.space.check(h)
        miss = regions.symmetric_difference_mass(
            self.marginal, self.space.positive_region(h), self.target_region)
        return self.noise + (1 - 2 * self.noise) * miss

    def true_risks(self, hyps) -> np.ndarray:
        if isinstance(self.space, ThresholdSpace) and self.target is not None:
            ts = np.array([h.params[0] for h in hyps], dtype=float)
            return self.threshold_risks(ts)
        return np.array([self.true_risk(h) for h in hyps])

    def threshold_risks(self, ts) -> np.ndarray:
        """Vectorized true risk of thresholds against a threshold target."""
        if not (isinstance(self.space, ThresholdSpace) and self.target is not None):
            raise UnsupportedError("threshold_risks needs a threshold world")
        t_star = self.target.params[0]
        miss = np.abs(self.marginal.cdf(ts) - self.marginal.cdf(t_star))
        return self.noise + (1 - 2 * self.noise) * miss

    def _compute_truth(self):
        if isinstance(self.space, FiniteSpace):
            hyps = self.space.hypotheses()
            risks = np.array([self.true_risk(h) for h in hyps])
            best = risks.min()
            return [h for h, r in zip(hyps, risks) if r <= best + MINIMIZER_TOL], float(best)
        if self.target is None:
            raise UnsupportedError("continuous classes need a target inside the class")
        return [self.target], float(self.noise)

    def all_true_minimizers(self) -> tuple[list[Hypothesis], float]:
        hyps, r_star = self._truth
        return list(hyps), r_star

    @property
    def r_star(self) -> float:
        return self._truth[1]

    def describe(self) -> dict:
        return {"name": self.name, "space": self.space.kind, "noise": self.noise,
                "marginal": [list(p) for p in self.marginal.pieces], **self.params}


def threshold_world(threshold=0.5, noise=0.0, marginal=None, name=None) -> SyntheticWorld:
    space = ThresholdSpace()
    marginal = marginal or regions.PiecewiseUniform.uniform()
    return SyntheticWorld(name or "threshold", space, marginal, target=space.hypothesis(threshold),
                          noise=noise, params={"threshold": threshold})


def interval_world(a=0.3, b=0.7, noise=0.0, marginal=None, name=None) -> SyntheticWorld:
    space = IntervalSpace()
    marginal = marginal or regions.PiecewiseUniform.uniform()
    return SyntheticWorld(name or "interval", space, marginal, target=space.hypothesis(a, b),
                          noise=noise, params={"a": a, "b": b})


def example1_world(epsilon=0.1) -> SyntheticWorld:
    """Two-member class, uniform marginal on [0, 1], every label -1."""
    space = FiniteSpace.example1(epsilon)
    return SyntheticWorld("example1", space, regions.PiecewiseUniform.uniform(),
                          target_member=Member.constant(NEGATIVE), params={"epsilon": epsilon})


def finite_world(space: FiniteSpace, target: Member, noise=0.0, marginal=None, name=None) -> SyntheticWorld:
    marginal = marginal or regions.PiecewiseUniform.uniform()
    return SyntheticWorld(name or "finite", space, marginal, target_member=target, noise=noise)


def sample(world: SyntheticWorld, n: int, seed=None) -> LabeledSample:
    return world.sample(n, seed)


def true_risk(world: SyntheticWorld, h: Hypothesis) -> float:
    return world.true_risk(h)


def all_true_minimizers(world: SyntheticWorld):
    return world.all_true_minimizers()
