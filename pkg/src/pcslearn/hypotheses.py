"""Labeled samples, 1-D hypothesis classes and exact (constrained) ERM.

Three classes are supported, each with an exact empirical-risk search:

* ``ThresholdSpace``: ``h_t(x) = +1`` iff ``x >= t`` (VC dimension 1)
* ``IntervalSpace``: ``h_ab(x) = +1`` iff ``a <= x <= b`` (VC dimension 2)
* ``FiniteSpace``: an explicit list of members, each +1 on a union of
  intervals.

Empirical risk is piecewise constant in the parameters of the continuous
classes, so every search runs over *canonical* candidates: thresholds at
midpoints between consecutive distinct sample values plus the two infinite
sentinels, and intervals whose endpoints sit on those same midpoints.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import regions

POSITIVE = 1
NEGATIVE = -1
LABELS = (NEGATIVE, POSITIVE)

INF = math.inf


class UnsupportedError(NotImplementedError):
    """Raised for class/world combinations without an exact procedure."""


@dataclass(frozen=True)
class Hypothesis:
    kind: str
    params: tuple

    def __str__(self):
        return f"{self.kind}{self.params}"


@dataclass(frozen=True, eq=False)
class LabeledSample:
    """Ordered (instance, label) pairs with labels in {-1, +1}."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        y = np.array(self.y, dtype=np.int8).reshape(-1)
        if x.shape != y.shape:
            raise ValueError(f"{x.size} instances but {y.size} labels")
        if not np.all(np.isfinite(x)):
            raise ValueError("instances must be finite")
        if not np.all(np.isin(y, LABELS)):
            raise ValueError("labels must be -1 or +1")
        x.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_pairs(cls, pairs) -> LabeledSample:
        pairs = list(pairs)
        if not pairs:
            return cls(np.empty(0), np.empty(0, dtype=np.int8))
        xs, ys = zip(*pairs)
        return cls(np.array(xs, dtype=float), np.array(ys))

    @classmethod
    def empty(cls) -> LabeledSample:
        return cls(np.empty(0), np.empty(0, dtype=np.int8))

    def __len__(self):
        return self.x.size

    @property
    def m(self) -> int:
        return self.x.size

    def __iter__(self):
        return zip(self.x.tolist(), self.y.tolist())

    def take(self, idx) -> LabeledSample:
        return LabeledSample(self.x[idx], self.y[idx])

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.x.tobytes())
        h.update(self.y.tobytes())
        return h.hexdigest()[:16]


def _as_instances(x):
    arr = np.asarray(x, dtype=float)
    if arr.ndim > 1:
        raise ValueError(f"1-D instances expected, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("instances must be finite")
    return arr


def _require_nonempty(sample: LabeledSample):
    if len(sample) == 0:
        raise ValueError("empirical risk needs a nonempty sample")


def _check_label(y):
    if y not in LABELS:
        raise ValueError(f"label must be -1 or +1, got {y!r}")


def _mid(a, b):
    if a == -INF:
        return -INF
    if b == INF:
        return INF
    return 0.5 * (a + b)


class HypothesisSpace:
    kind: str
    vc_dimension: int

    def check(self, h: Hypothesis):
        if not isinstance(h, Hypothesis) or h.kind != self.kind:
            raise ValueError(f"{h} does not belong to a {self.kind} class")

    def predict(self, h: Hypothesis, x):
        self.check(h)
        arr = _as_instances(x)
        out = np.where(self._positive(h, arr), POSITIVE, NEGATIVE).astype(np.int8)
        return int(out) if out.ndim == 0 else out

    def mistakes(self, h: Hypothesis, sample: LabeledSample) -> int:
        self.check(h)
        pred = np.where(self._positive(h, sample.x), POSITIVE, NEGATIVE)
        return int(np.count_nonzero(pred != sample.y))

    def _positive(self, h, x) -> np.ndarray:
        raise NotImplementedError

    def profile(self, sample: LabeledSample):
        """Precomputed risk structure over ``sample`` (see the ``*Profile`` classes)."""
        raise NotImplementedError

    def positive_region(self, h: Hypothesis) -> regions.Region:
        raise NotImplementedError

    def realizes_both(self, x) -> np.ndarray:
        """Whether some member predicts +1 and some member predicts -1 at ``x``."""
        return np.ones(np.shape(x), dtype=bool)

    def default_hypothesis(self) -> Hypothesis:
        raise NotImplementedError

    def random_hypotheses(self, n: int, rng: np.random.Generator, lo=0.0, hi=1.0) -> list[Hypothesis]:
        raise NotImplementedError

    def describe(self) -> dict:
        return {"kind": self.kind, "vc_dimension": self.vc_dimension}


class ThresholdSpace(HypothesisSpace):
    kind = "threshold-1d"
    vc_dimension = 1

    def hypothesis(self, t: float) -> Hypothesis:
        t = float(t)
        if math.isnan(t):
            raise ValueError("threshold must not be NaN")
        return Hypothesis(self.kind, (t,))

    def _positive(self, h, x):
        return x >= h.params[0]

    def profile(self, sample):
        return ThresholdProfile(self, sample)

    def positive_region(self, h):
        self.check(h)
        return ((h.params[0], INF),)

    def default_hypothesis(self):
        return self.hypothesis(-INF)

    def random_hypotheses(self, n, rng, lo=0.0, hi=1.0):
        return [self.hypothesis(t) for t in rng.uniform(lo - 0.1, hi + 0.1, n)]


class IntervalSpace(HypothesisSpace):
    kind = "interval-1d"
    vc_dimension = 2

    def hypothesis(self, a: float, b: float) -> Hypothesis:
        a, b = float(a), float(b)
        if not a <= b:
            raise ValueError(f"interval needs a <= b, got [{a}, {b}]")
        return Hypothesis(self.kind, (a, b))

    def empty(self) -> Hypothesis:
        return self.hypothesis(INF, INF)

    def _positive(self, h, x):
        a, b = h.params
        return (x >= a) & (x <= b)

    def profile(self, sample):
        return IntervalProfile(self, sample)

    def positive_region(self, h):
        self.check(h)
        a, b = h.params
        return () if a == INF else ((a, b),)

    def default_hypothesis(self):
        return self.empty()

    def random_hypotheses(self, n, rng, lo=0.0, hi=1.0):
        ends = np.sort(rng.uniform(lo - 0.1, hi + 0.1, (n, 2)), axis=1)
        return [self.hypothesis(a, b) for a, b in ends]


@dataclass(frozen=True)
class Member:
    """A fixed predictor: +1 on a union of intervals, -1 elsewhere.

    ``pieces`` holds ``(lo, hi, lo_closed, hi_closed)``.
    """

    name: str
    pieces: tuple = ()

    @classmethod
    def constant(cls, label: int, name: str | None = None) -> Member:
        _check_label(label)
        pieces = ((-INF, INF, True, True),) if label == POSITIVE else ()
        return cls(name or f"const{label:+d}", pieces)

    @classmethod
    def threshold(cls, t: float, name: str | None = None) -> Member:
        return cls(name or f"x>={t:g}", ((t, INF, True, True),))

    def positive(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros(np.shape(x), dtype=bool)
        for lo, hi, lc, hc in self.pieces:
            above = (x >= lo) if lc else (x > lo)
            below = (x <= hi) if hc else (x < hi)
            out |= above & below
        return out

    @property
    def region(self) -> regions.Region:
        return regions.normalize((lo, hi) for lo, hi, _, _ in self.pieces)


class FiniteSpace(HypothesisSpace):
    kind = "finite-explicit"

    def __init__(self, members, vc_dimension: int | None = None):
        members = tuple(members)
        if not members:
            raise ValueError("finite class needs at least one member")
        # a single member has VC dimension 0; the slack formulas need d >= 1
        cap = max(1, int(math.floor(math.log2(len(members)))))
        if vc_dimension is None:
            vc_dimension = cap
        if not 1 <= vc_dimension <= cap:
            raise ValueError(f"vc_dimension {vc_dimension} outside [1, {cap}] for {len(members)} members")
        self.members = members
        self.vc_dimension = int(vc_dimension)

    @classmethod
    def example1(cls, epsilon: float) -> FiniteSpace:
        """Two predictors, +1 on ``x < eps`` and on ``x > 1 - eps`` respectively."""
        if not 0 < epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 0.5)")
        f1 = Member("f1", ((-INF, epsilon, True, False),))
        f2 = Member("f2", ((1 - epsilon, INF, False, True),))
        return cls([f1, f2], vc_dimension=1)

    def __len__(self):
        return len(self.members)

    def hypothesis(self, index) -> Hypothesis:
        if isinstance(index, str):
            names = [mem.name for mem in self.members]
            if index not in names:
                raise ValueError(f"no member named {index!r}")
            index = names.index(index)
        index = int(index)
        if not 0 <= index < len(self.members):
            raise ValueError(f"member index {index} out of range")
        return Hypothesis(self.kind, (index,))

    def hypotheses(self) -> list[Hypothesis]:
        return [self.hypothesis(i) for i in range(len(self.members))]

    def check(self, h):
        super().check(h)
        if not 0 <= h.params[0] < len(self.members):
            raise ValueError(f"{h} is not a member of this class")

    def name(self, h: Hypothesis) -> str:
        self.check(h)
        return self.members[h.params[0]].name

    def _positive(self, h, x):
        return self.members[h.params[0]].positive(x)

    def prediction_matrix(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.stack([np.where(mem.positive(x), POSITIVE, NEGATIVE) for mem in self.members]).astype(np.int8)

    def profile(self, sample):
        return FiniteProfile(self, sample)

    def positive_region(self, h):
        self.check(h)
        return self.members[h.params[0]].region

    def realizes_both(self, x):
        p = self.prediction_matrix(np.atleast_1d(x))
        out = (p == POSITIVE).any(axis=0) & (p == NEGATIVE).any(axis=0)
        return out.reshape(np.shape(x))

    def default_hypothesis(self):
        return self.hypothesis(0)

    def random_hypotheses(self, n, rng, lo=0.0, hi=1.0):
        return [self.hypothesis(i) for i in rng.integers(0, len(self.members), n)]

    def breakpoints(self) -> np.ndarray:
        return regions.breakpoints(*(mem.region for mem in self.members))

    def describe(self):
        out = super().describe()
        out["members"] = [mem.name for mem in self.members]
        return out


def _group(sample: LabeledSample):
    u, inv = np.unique(sample.x, return_inverse=True)
    pos = np.bincount(inv, weights=(sample.y == POSITIVE), minlength=u.size).astype(np.int64)
    neg = np.bincount(inv, weights=(sample.y == NEGATIVE), minlength=u.size).astype(np.int64)
    return u, pos, neg


@dataclass(eq=False)
class ThresholdProfile:
    """Mistake counts of every canonical threshold over one sample.

    Piece ``k`` (``0 <= k <= n`` for ``n`` distinct values ``u``) is the
    parameter range ``(u[k-1], u[k]]`` with ``u[-1] = -inf`` and ``u[n] =
    +inf``; every threshold in a piece makes the same mistakes.
    """

    space: ThresholdSpace
    sample: LabeledSample
    u: np.ndarray = field(init=False)
    counts: np.ndarray = field(init=False)

    def __post_init__(self):
        _require_nonempty(self.sample)
        u, pos, neg = _group(self.sample)
        cumpos = np.concatenate([[0], np.cumsum(pos)])
        cumneg = np.concatenate([[0], np.cumsum(neg)])
        self.u = u
        self.counts = cumpos + (cumneg[-1] - cumneg)
        self._prefix_min = np.minimum.accumulate(self.counts)
        self._suffix_min = np.minimum.accumulate(self.counts[::-1])[::-1]

    @property
    def m(self) -> int:
        return len(self.sample)

    @property
    def representatives(self) -> np.ndarray:
        u = self.u
        return np.concatenate([[-INF], 0.5 * (u[:-1] + u[1:]), [INF]])

    def piece_bounds(self, k: int) -> tuple[float, float]:
        lo = -INF if k == 0 else self.u[k - 1]
        hi = INF if k == self.u.size else self.u[k]
        return lo, hi

    def canonical(self):
        return [self.space.hypothesis(t) for t in self.representatives], self.counts.copy()

    def erm(self):
        k = int(np.argmin(self.counts))
        return self.space.hypothesis(self.representatives[k]), int(self.counts[k])

    def constrained(self, x: float, y: int):
        reps = self.representatives
        if y == POSITIVE:
            # t <= x: pieces whose lower end lies below x
            j = int(np.searchsorted(self.u, x, side="left"))
            k = int(np.argmin(self.counts[: j + 1]))
            t = reps[k]
            if t > x:
                t = x
        else:
            # t > x: pieces whose upper end lies above x
            i = int(np.searchsorted(self.u, x, side="right"))
            k = i + int(np.argmin(self.counts[i:]))
            t = reps[k]
            if t <= x:
                t = _mid(x, self.piece_bounds(k)[1])
                if t <= x:  # adjacent floats: the closed upper end still works
                    t = self.piece_bounds(k)[1]
        return self.space.hypothesis(t), int(self.counts[k])

    def constrained_counts(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y)
        j = np.searchsorted(self.u, x, side="left")
        i = np.searchsorted(self.u, x, side="right")
        return np.where(y == POSITIVE, self._prefix_min[j], self._suffix_min[i]).astype(float)

    def breakpoints(self) -> np.ndarray:
        return self.u


@dataclass(eq=False)
class IntervalProfile:
    """Exact interval ERM through prefix sums over distinct sample values.

    With ``w[k] = neg[k] - pos[k]`` per distinct value and ``S`` its prefix
    sum, covering values ``i..j`` costs ``P + S[j+1] - S[i]`` mistakes, where
    ``P`` is the number of positive labels. Canonical scan order: the empty
    interval first, then by right end, then by left end.
    """

    space: IntervalSpace
    sample: LabeledSample

    def __post_init__(self):
        _require_nonempty(self.sample)
        u, pos, neg = _group(self.sample)
        n = u.size
        s = np.concatenate([[0], np.cumsum(neg - pos)])
        self.u = u
        self.n = n
        self.total_pos = int(pos.sum())
        self.s = s
        self._pmax = np.maximum.accumulate(s)
        self._smin = np.minimum.accumulate(s[::-1])[::-1]
        # best (most negative, or 0 for empty) subarray inside values [0, k) and [k, n)
        ending = np.minimum(0, s[1:] - self._pmax[:-1])
        starting = np.minimum(0, self._smin[1:] - s[:-1])
        self._best_left = np.concatenate([[0], np.minimum.accumulate(ending)])
        self._best_right = np.concatenate([np.minimum.accumulate(starting[::-1])[::-1], [0]])

    @property
    def m(self) -> int:
        return len(self.sample)

    def _endpoint_left(self, i):
        return -INF if i == 0 else 0.5 * (self.u[i - 1] + self.u[i])

    def _endpoint_right(self, k):
        # k = j + 1, one past the last covered value
        return INF if k == self.n else 0.5 * (self.u[k - 1] + self.u[k])

    def _best_within(self, lo: int, hi: int):
        """Best covered range ``[i, k)`` with ``lo <= i < k <= hi``, or None for empty."""
        best, arg = 0, None
        i_best = lo
        for k in range(lo + 1, hi + 1):
            if self.s[k - 1] > self.s[i_best]:
                i_best = k - 1
            val = self.s[k] - self.s[i_best]
            if val < best:
                best, arg = val, (i_best, k)
        return best, arg

    def canonical(self):
        hyps = [self.space.empty()]
        counts = [self.total_pos]
        for k in range(1, self.n + 1):
            for i in range(k):
                hyps.append(self.space.hypothesis(self._endpoint_left(i), self._endpoint_right(k)))
                counts.append(self.total_pos + self.s[k] - self.s[i])
        return hyps, np.array(counts)

    def erm(self):
        if self.n == 0:
            return self.space.empty(), self.total_pos
        vals = self.s[1:] - self._pmax[:-1]
        k = int(np.argmin(vals)) + 1
        if vals[k - 1] >= 0:
            return self.space.empty(), self.total_pos
        i = int(np.argmax(self.s[:k]))
        h = self.space.hypothesis(self._endpoint_left(i), self._endpoint_right(k))
        return h, int(self.total_pos + vals[k - 1])

    def _bounds(self, x):
        lo = int(np.searchsorted(self.u, x, side="left"))
        hi = int(np.searchsorted(self.u, x, side="right"))
        return lo, hi

    def constrained(self, x: float, y: int):
        lo, hi = self._bounds(x)
        if y == POSITIVE:
            k = hi + int(np.argmin(self.s[hi:]))
            i = int(np.argmax(self.s[: lo + 1]))
            # a in (ue[i], ue[i+1]] and b in [ue[k], ue[k+1]), with a <= x <= b
            ue = np.concatenate([[-INF], self.u, [INF]])
            a = _mid(ue[i], ue[i + 1])
            if a > x:
                a = x
            b = _mid(ue[k], ue[k + 1])
            if b < x:
                b = x
            count = self.total_pos + self.s[k] - self.s[i]
            return self.space.hypothesis(a, b), int(count)
        best_l, arg_l = self._best_within(0, lo)
        best_r, arg_r = self._best_within(hi, self.n)
        if min(best_l, best_r) >= 0:
            return self.space.empty(), self.total_pos
        if best_l <= best_r:
            i, k = arg_l
            a, b = self._endpoint_left(i), self._endpoint_right(k)
            if b >= x:
                b = _mid(self.u[k - 1], x)
                if b >= x:
                    b = self.u[k - 1]
            count = best_l
        else:
            i, k = arg_r
            a, b = self._endpoint_left(i), self._endpoint_right(k)
            if a <= x:
                a = _mid(x, self.u[i])
                if a <= x:
                    a = self.u[i]
            count = best_r
        return self.space.hypothesis(a, b), int(self.total_pos + count)

    def constrained_counts(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y)
        lo = np.searchsorted(self.u, x, side="left")
        hi = np.searchsorted(self.u, x, side="right")
        pos_cost = self._smin[hi] - self._pmax[lo]
        neg_cost = np.minimum(0, np.minimum(self._best_left[lo], self._best_right[hi]))
        return (self.total_pos + np.where(y == POSITIVE, pos_cost, neg_cost)).astype(float)

    def breakpoints(self) -> np.ndarray:
        return self.u


@dataclass(eq=False)
class FiniteProfile:
    space: FiniteSpace
    sample: LabeledSample

    def __post_init__(self):
        _require_nonempty(self.sample)
        preds = self.space.prediction_matrix(self.sample.x)
        self.counts = np.count_nonzero(preds != self.sample.y, axis=1)

    @property
    def m(self) -> int:
        return len(self.sample)

    def canonical(self):
        return self.space.hypotheses(), self.counts.copy()

    def erm(self):
        k = int(np.argmin(self.counts))
        return self.space.hypothesis(k), int(self.counts[k])

    def all_erms(self) -> list[Hypothesis]:
        best = self.counts.min()
        return [self.space.hypothesis(k) for k in np.flatnonzero(self.counts == best)]

    def constrained(self, x: float, y: int):
        preds = self.space.prediction_matrix(np.array([x]))[:, 0]
        feasible = np.flatnonzero(preds == y)
        if feasible.size == 0:
            return None
        k = int(feasible[np.argmin(self.counts[feasible])])
        return self.space.hypothesis(k), int(self.counts[k])

    def constrained_counts(self, x, y) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        y = np.broadcast_to(np.asarray(y), x.shape)
        preds = self.space.prediction_matrix(x)
        cost = np.where(preds == y[None, :], self.counts[:, None].astype(float), INF)
        return cost.min(axis=0)

    def breakpoints(self) -> np.ndarray:
        return self.space.breakpoints()


def predict(space: HypothesisSpace, h: Hypothesis, x):
    return space.predict(h, x)


def empirical_risk(space: HypothesisSpace, h: Hypothesis, sample: LabeledSample) -> float:
    _require_nonempty(sample)
    return space.mistakes(h, sample) / len(sample)


def erm(space: HypothesisSpace, sample: LabeledSample) -> Hypothesis:
    return space.profile(sample).erm()[0]


def all_erms(space: FiniteSpace, sample: LabeledSample) -> list[Hypothesis]:
    """Every empirical minimizer of a finite class (canonical ones otherwise)."""
    prof = space.profile(sample)
    if isinstance(prof, FiniteProfile):
        return prof.all_erms()
    hyps, counts = prof.canonical()
    return [h for h, c in zip(hyps, counts) if c == counts.min()]


def constrained_erm(space: HypothesisSpace, sample: LabeledSample, x: float, y: int):
    """Best hypothesis forced to predict ``y`` at ``x``, with its empirical risk.

    Returns ``None`` when no member of the class satisfies the constraint.
    """
    _check_label(y)
    x = float(_as_instances(x))
    found = space.profile(sample).constrained(x, y)
    if found is None:
        return None
    h, count = found
    return h, count / len(sample)
