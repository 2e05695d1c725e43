"""Disagreement mass of hypothesis balls and the disagreement coefficient.

The ball ``B(f, r)`` holds every hypothesis whose disagreement probability
with ``f`` is at most ``r``. Since ``f`` itself is in the ball, a point lies
in the ball's disagreement region exactly when some ball member disagrees
with ``f`` there, which reduces every 1-D class to a cheapest-flip question:
how much disagreement mass does it cost to flip ``f``'s label at ``x``?

* thresholds: move the threshold to ``x``; cost = mass between them
* intervals: stretch or shrink the interval to ``x``, or (outside) jump to
  a degenerate interval at ``x`` at the cost of ``f``'s whole mass
* finite classes: enumerate the members

``ANALYTIC`` evaluates those costs under the world's marginal; ``MONTE_CARLO``
evaluates them on a sorted sample, counting sample points for mass.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from . import regions
from .hypotheses import (
    INF,
    FiniteSpace,
    Hypothesis,
    IntervalSpace,
    ThresholdSpace,
    UnsupportedError,
)

ANALYTIC, MONTE_CARLO = "ANALYTIC", "MONTE_CARLO"
DEFAULT_POINTS = 64

# ball membership is a closed comparison; distances come from float cdf sums
_BALL_TOL = 1e-12


def _check_radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)) or np.any(r > 1):
        raise ValueError("radius must lie in (0, 1]")
    return r


def _threshold_mass(world, f, r):
    below = float(world.marginal.cdf(f.params[0]))
    return np.minimum(r, below) + np.minimum(r, 1 - below)


def _interval_mass(world, f, r):
    a, b = f.params
    if a == INF:
        return np.ones_like(r)
    fa, fb = world.marginal.cdf([a, b])
    inside = fb - fa
    spread = np.minimum(r, fa) + np.minimum(r, 1 - fb) + np.minimum(inside, 2 * r)
    return np.where(inside <= r + _BALL_TOL, 1.0, spread)


def _finite_mass(space: FiniteSpace, world, f, r):
    hyps = space.hypotheses()
    dist = np.array([world.disagreement_mass(f, h) for h in hyps])
    lo, hi = world.marginal.support
    c = regions.cells(np.concatenate([space.breakpoints(), world.marginal.edges]), lo, hi)
    preds = space.prediction_matrix(c.mean(axis=1))
    differs = preds != preds[f.params[0]][None, :]
    cell_mass = world.marginal.interval_mass(c[:, 0], c[:, 1])
    out = []
    for rr in np.atleast_1d(r):
        inball = dist <= rr + _BALL_TOL
        out.append(float(cell_mass[differs[inball].any(axis=0)].sum()))
    return np.array(out).reshape(np.shape(r))


def _mc_sorted(world, n, seed):
    rng = np.random.default_rng(seed)
    return np.sort(world.sample_x(n, rng))


def _mc_mass(space, world, f, r, n, seed):
    xs = _mc_sorted(world, n, seed)
    k = np.floor(np.asarray(r) * n + 1e-9)
    if isinstance(space, ThresholdSpace):
        c = np.searchsorted(xs, f.params[0], side="left")
        return (np.minimum(k, c) + np.minimum(k, n - c)) / n
    if isinstance(space, IntervalSpace):
        a, b = f.params
        if a == INF:
            return np.ones_like(k)
        lo = np.searchsorted(xs, a, side="left")
        hi = np.searchsorted(xs, b, side="right")
        w = hi - lo
        spread = np.minimum(k, lo) + np.minimum(k, n - hi) + np.minimum(w, 2 * k)
        return np.where(w + 1 <= k, 1.0, spread / n)
    if isinstance(space, FiniteSpace):
        preds = space.prediction_matrix(xs)
        differs = preds != preds[f.params[0]][None, :]
        dist = differs.sum(axis=1)
        out = [differs[dist <= kk].any(axis=0).sum() / n for kk in np.atleast_1d(k)]
        return np.array(out).reshape(np.shape(k))
    raise UnsupportedError(f"no Monte-Carlo procedure for {space.kind}")


def ball_disagreement_mass(space, world, f: Hypothesis, r, method=ANALYTIC, n=None, seed=0):
    """Mass of the disagreement region of ``B(f, r)``; vectorized over ``r``."""
    space.check(f)
    r = _check_radius(r)
    if method == MONTE_CARLO:
        if not n:
            raise UnsupportedError("Monte-Carlo estimation needs a sample budget n")
        out = _mc_mass(space, world, f, r, int(n), seed)
    elif method == ANALYTIC:
        if isinstance(space, ThresholdSpace):
            out = _threshold_mass(world, f, r)
        elif isinstance(space, IntervalSpace):
            out = _interval_mass(world, f, r)
        elif isinstance(space, FiniteSpace):
            out = _finite_mass(space, world, f, r)
        else:
            raise UnsupportedError(f"no analytic ball mass for {space.kind}")
    else:
        raise ValueError(f"unknown method {method!r}")
    return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)


def breakpoints(space, world, f: Hypothesis) -> np.ndarray:
    """Radii where the ball mass changes slope or jumps."""
    if isinstance(space, ThresholdSpace):
        below = float(world.marginal.cdf(f.params[0]))
        pts = [below, 1 - below]
    elif isinstance(space, IntervalSpace):
        a, b = f.params
        if a == INF:
            pts = []
        else:
            fa, fb = world.marginal.cdf([a, b])
            pts = [fa, 1 - fb, fb - fa, (fb - fa) / 2]
    elif isinstance(space, FiniteSpace):
        pts = [world.disagreement_mass(f, h) for h in space.hypotheses()]
    else:
        pts = []
    pts = np.asarray(pts, dtype=float)
    return np.unique(pts[(pts > 0) & (pts <= 1)])


def default_grid(r0: float, points: int = DEFAULT_POINTS) -> np.ndarray:
    return np.geomspace(r0, 1.0, points)


@dataclass(frozen=True, eq=False)
class ThetaEstimate:
    f: Hypothesis
    r0: float
    r_grid: np.ndarray
    delta_b: np.ndarray
    theta_at: np.ndarray
    method: str
    mc_samples: int | None = None

    @property
    def value(self) -> float:
        """``sup_{r > r0} mass(r) / r`` over the grid (the last, smallest entry)."""
        return float(self.theta_at[-1])

    def to_record(self) -> dict:
        return {
            "f": list(self.f.params),
            "r0": self.r0,
            "method": self.method,
            "mc_samples": self.mc_samples,
            "theta": self.value,
            "r_grid": self.r_grid.tolist(),
            "delta_b": self.delta_b.tolist(),
            "theta_at": self.theta_at.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "delta_b", "delta_b_over_r"])
        for r, m in zip(self.r_grid, self.delta_b):
            w.writerow([repr(float(r)), repr(float(m)), repr(float(m / r))])
        return buf.getvalue()


def theta_f(space, world, f: Hypothesis, r0: float, r_grid=None, method=ANALYTIC,
            n=None, seed=0, points: int = DEFAULT_POINTS) -> ThetaEstimate:
    """Disagreement coefficient of ``f`` above ``r0``.

    On each stretch between breakpoints the ball mass is ``c r + b`` with
    ``b >= 0``, so ``mass / r`` peaks at the stretch's left end. Evaluating at
    ``r0`` and at every breakpoint above it therefore gives the exact
    supremum for the analytic path; the geometric grid fills in the curve.
    """
    if not 0 < r0 <= 1:
        raise ValueError("r0 must lie in (0, 1]")
    grid = default_grid(r0, points) if r_grid is None else np.asarray(r_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("radius grid is empty")
    if np.any(grid < r0) or np.any(grid > 1):
        raise ValueError("grid radii must lie in [r0, 1]")
    bp = breakpoints(space, world, f)
    grid = np.unique(np.concatenate([grid, [r0], bp[bp > r0]]))[::-1]
    mass = np.asarray(ball_disagreement_mass(space, world, f, grid, method, n, seed), dtype=float)
    theta_at = np.maximum.accumulate(mass / grid)
    return ThetaEstimate(f, float(r0), grid, mass, theta_at, method,
                         int(n) if method == MONTE_CARLO else None)


def class_hypotheses(space, world, count: int = 257) -> list[Hypothesis]:
    """A sample of the class: every member if finite, a quantile grid otherwise."""
    if isinstance(space, FiniteSpace):
        return space.hypotheses()
    q = world.marginal.quantile(np.linspace(0, 1, count))
    if isinstance(space, ThresholdSpace):
        return [space.hypothesis(t) for t in q]
    if isinstance(space, IntervalSpace):
        return [space.hypothesis(a, b) for i, a in enumerate(q) for b in q[i:]]
    raise UnsupportedError(f"cannot enumerate {space.kind}")


def theta_class(space, world, r0: float, f_sample=None, **kwargs) -> tuple[float, bool]:
    """``sup_f theta_f(r0)`` over ``f_sample`` and whether it is only a lower bound."""
    hyps = class_hypotheses(space, world) if f_sample is None else list(f_sample)
    if not hyps:
        raise ValueError("hypothesis sample is empty")
    best = max(theta_f(space, world, f, r0, **kwargs).value for f in hyps)
    return best, not isinstance(space, FiniteSpace)


def theta_star(world, r0: float, **kwargs) -> float:
    """Coefficient at the world's risk minimizers (max over them when several)."""
    hyps, _ = world.all_true_minimizers()
    return max(theta_f(world.space, world, f, r0, **kwargs).value for f in hyps)


def threshold_theta_upper(world, f: Hypothesis) -> float:
    """Analytic cap on the threshold coefficient at ``f``: two sides of width ``r``."""
    if not isinstance(world.space, ThresholdSpace):
        raise UnsupportedError("only thresholds have this cap")
    return 2.0

