"""Interval geometry on the real line and piecewise-uniform marginals.

A *region* is a tuple of ``(lo, hi)`` pairs describing a finite union of
intervals. Endpoint closedness is not tracked here: every mass computed in
this module is with respect to a continuous distribution, so boundaries are
measure-zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

Region = tuple[tuple[float, float], ...]


def normalize(region) -> Region:
    """Sort and merge overlapping pieces; drop empty ones."""
    pieces = sorted((float(lo), float(hi)) for lo, hi in region if hi > lo)
    merged: list[list[float]] = []
    for lo, hi in pieces:
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


def contains(region: Region, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape, dtype=bool)
    for lo, hi in region:
        out |= (x >= lo) & (x <= hi)
    return out


def breakpoints(*regions: Region) -> np.ndarray:
    pts = [v for region in regions for piece in region for v in piece]
    pts = np.asarray(pts, dtype=float)
    return np.unique(pts[np.isfinite(pts)])


def cells(points, lo: float, hi: float) -> np.ndarray:
    """Elementary open cells of ``[lo, hi]`` cut at ``points``, as an (n, 2) array."""
    pts = np.asarray(points, dtype=float)
    pts = pts[(pts > lo) & (pts < hi)]
    edges = np.unique(np.concatenate([[lo], pts, [hi]]))
    return np.column_stack([edges[:-1], edges[1:]])


@dataclass(frozen=True)
class PiecewiseUniform:
    """Density that is uniform on each of a few disjoint sub-intervals.

    ``pieces`` holds ``(a, b, mass)`` triples with ``a < b``; the masses sum
    to one.
    """

    pieces: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        pieces = tuple(sorted((float(a), float(b), float(w)) for a, b, w in self.pieces))
        if not pieces:
            raise ValueError("marginal needs at least one piece")
        for a, b, w in pieces:
            if not (np.isfinite(a) and np.isfinite(b) and a < b):
                raise ValueError(f"bad piece [{a}, {b}]")
            if w < 0:
                raise ValueError("negative piece mass")
        for (_, b0, _), (a1, _, _) in zip(pieces, pieces[1:]):
            if a1 < b0:
                raise ValueError("marginal pieces overlap")
        total = sum(w for _, _, w in pieces)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"piece masses sum to {total}, not 1")
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def uniform(cls, lo: float = 0.0, hi: float = 1.0) -> PiecewiseUniform:
        return cls(((lo, hi, 1.0),))

    @property
    def support(self) -> tuple[float, float]:
        return self.pieces[0][0], self.pieces[-1][1]

    @property
    def edges(self) -> np.ndarray:
        return np.unique([v for a, b, _ in self.pieces for v in (a, b)])

    def cdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for a, b, w in self.pieces:
            out += w * np.clip((x - a) / (b - a), 0.0, 1.0)
        return np.minimum(out, 1.0)

    def quantile(self, q) -> np.ndarray:
        q = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
        out = np.full(q.shape, self.pieces[-1][1])
        start = 0.0
        done = np.zeros(q.shape, dtype=bool)
        for a, b, w in self.pieces:
            if w <= 0:
                continue
            hit = ~done & (q <= start + w)
            out[hit] = a + (q[hit] - start) / w * (b - a)
            done |= hit
            start += w
        return out

    def interval_mass(self, lo, hi) -> np.ndarray:
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return np.maximum(self.cdf(hi) - self.cdf(lo), 0.0)

    def mass(self, region: Region) -> float:
        region = normalize(region)
        if not region:
            return 0.0
        lo, hi = np.asarray(region, dtype=float).T
        return float(np.sum(self.interval_mass(lo, hi)))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        # inverse cdf keeps one uniform per draw, so chunked draws match one long draw
        return self.quantile(rng.random(n))

    def grid(self, n: int) -> np.ndarray:
        """``n`` probe points at the midpoints of equal-mass bins."""
        return self.quantile((np.arange(n) + 0.5) / n)


def symmetric_difference_mass(marginal: PiecewiseUniform, r1: Region, r2: Region) -> float:
    lo, hi = marginal.support
    c = cells(breakpoints(r1, r2), lo, hi)
    mid = c.mean(axis=1)
    differ = contains(r1, mid) != contains(r2, mid)
    return float(np.sum(marginal.interval_mass(c[differ, 0], c[differ, 1])))
