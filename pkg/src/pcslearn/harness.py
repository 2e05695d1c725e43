"""Repeated-trial experiments that turn each guarantee into a verdict.

Configs are INI files::

    [experiment]
    kind = REJECTION_CURVE
    algorithm = ILESS
    m_grid = 500, 2000
    delta = 0.1
    trials = 200
    seed = 7

    [world]
    kind = example1
    epsilon = 0.1

Every trial draws from ``default_rng([seed, m, trial])``, so the same
``(seed, m, trial)`` sees the same sample whichever algorithm runs on it.
Reports hold the per-trial rows each verdict was computed from.
"""
from __future__ import annotations

import configparser
import csv
import io
import json
import math
import os
import re
import tempfile
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import active, bounds, disagreement, selective
from .hypotheses import FiniteSpace, Member, ThresholdSpace
from .regions import PiecewiseUniform
from .worlds import SyntheticWorld, example1_world, finite_world, interval_world, threshold_world

OUTPUT_ENV = "PCSLEARN_OUTPUT_DIR"

REJECTION_CURVE = "REJECTION_CURVE"
LABEL_CURVE = "LABEL_CURVE"
COMPETITIVE_CHECK = "COMPETITIVE_CHECK"
THETA_SCAN = "THETA_SCAN"
EQUIVALENCE_CHECK = "EQUIVALENCE_CHECK"
BOUND_AUDIT = "BOUND_AUDIT"
EXPERIMENTS = (REJECTION_CURVE, LABEL_CURVE, COMPETITIVE_CHECK, THETA_SCAN, EQUIVALENCE_CHECK, BOUND_AUDIT)

LESS, ILESS, ACTIVE, BATCH = "LESS", "ILESS", "ACTIVE", "BATCH"
ALGORITHMS = (LESS, ILESS, ACTIVE, BATCH)

_ALLOWED = {
    REJECTION_CURVE: (LESS, ILESS, BATCH),
    LABEL_CURVE: (ACTIVE,),
    COMPETITIVE_CHECK: (LESS, ILESS, BATCH),
    EQUIVALENCE_CHECK: (BATCH,),
    BOUND_AUDIT: (ILESS,),
    THETA_SCAN: ALGORITHMS,
}

PROBE_POINTS = 2048


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line else source
        super().__init__(f"{where}: {message}")


# worlds


def world_from_spec(spec: dict) -> SyntheticWorld:
    """Build a world from string-valued config entries."""
    spec = dict(spec)
    kind = spec.pop("kind", "threshold")
    noise = float(spec.pop("noise", 0.0))
    marginal = parse_marginal(spec.pop("marginal")) if "marginal" in spec else None
    if kind == "threshold":
        return threshold_world(float(spec.pop("threshold", 0.5)), noise, marginal)
    if kind == "interval":
        return interval_world(float(spec.pop("a", 0.3)), float(spec.pop("b", 0.7)), noise, marginal)
    if kind == "example1":
        return example1_world(float(spec.pop("epsilon", 0.1)))
    if kind == "single":
        t = float(spec.pop("threshold", 0.5))
        member = Member.threshold(t)
        return finite_world(FiniteSpace([member]), member, noise, marginal, name="single")
    raise ValueError(f"unknown world kind {kind!r}")


def parse_marginal(text: str) -> PiecewiseUniform:
    """``"a:b:mass, a:b:mass"`` pieces."""
    pieces = []
    for chunk in text.split(","):
        a, b, w = (float(v) for v in chunk.strip().split(":"))
        pieces.append((a, b, w))
    return PiecewiseUniform(tuple(pieces))


NAMED_WORLDS = {
    "threshold-uniform": lambda: threshold_world(0.5),
    "interval-uniform": lambda: interval_world(0.3, 0.7),
    "example1": lambda: example1_world(0.1),
}


# config


@dataclass
class ExperimentConfig:
    experiment: str
    world: dict
    algorithm: str = ILESS
    m_grid: list[int] = field(default_factory=lambda: [256])
    delta: float = 0.1
    epsilon: float | None = None
    trials: int = 10
    seed: int = 0
    output: str | None = None
    options: dict = field(default_factory=dict)

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.algorithm not in _ALLOWED[self.experiment]:
            raise ValueError(f"{self.experiment} does not run algorithm {self.algorithm}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if not self.m_grid or any(b <= a for a, b in zip(self.m_grid, self.m_grid[1:])):
            raise ValueError("m_grid must be nonempty and strictly ascending")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        return self

    def to_record(self) -> dict:
        return asdict(self)

    def world_obj(self) -> SyntheticWorld:
        return world_from_spec(self.world)


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        head = re.match(r"\[(.+)\]$", s)
        if head:
            current = head.group(1).strip()
            if key is None and current == section:
                return i
            continue
        if current == section and key is not None and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return i
    return None


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text, source=source)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("malformed line", line, source) from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None), source) from exc
    if not cp.has_section("experiment"):
        raise ConfigError("missing [experiment] section", None, source)
    if not cp.has_section("world"):
        raise ConfigError("missing [world] section", None, source)
    sec = cp["experiment"]

    def get(key, conv, default=None):
        if key not in sec or sec[key].strip() == "":
            return default
        try:
            return conv(sec[key].strip())
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", _line_of(text, "experiment", key), source) from None

    if "kind" not in sec:
        raise ConfigError("missing 'kind'", _line_of(text, "experiment", None), source)
    known = {"kind", "algorithm", "m_grid", "delta", "epsilon", "trials", "seed", "output"}
    cfg = ExperimentConfig(
        experiment=sec["kind"].strip().upper(),
        world=dict(cp["world"]),
        algorithm=get("algorithm", str.upper, ILESS),
        m_grid=get("m_grid", lambda s: [int(v) for v in s.split(",")], [256]),
        delta=get("delta", float, 0.1),
        epsilon=get("epsilon", float),
        trials=get("trials", int, 10),
        seed=get("seed", int, 0),
        output=get("output", str),
        options={k: v for k, v in sec.items() if k not in known},
    )
    try:
        cfg.validate()
    except ValueError as exc:
        key = {"unknown experiment": "kind", "does not run": "algorithm", "trials": "trials",
               "delta": "delta", "m_grid": "m_grid", "epsilon": "epsilon"}
        hit = next((v for k, v in key.items() if k in str(exc)), None)
        raise ConfigError(str(exc), _line_of(text, "experiment", hit) if hit else None, source) from None
    try:
        cfg.world_obj()
    except (ValueError, TypeError) as exc:
        bad = next((k for k in cfg.world if k in str(exc)), "kind")
        raise ConfigError(f"bad world: {exc}", _line_of(text, "world", bad), source) from None
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path))


# reports


@dataclass
class Verdict:
    id: str
    description: str
    passed: bool
    observed: float
    limit: float

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.observed = float(self.observed)
        self.limit = float(self.limit)


@dataclass
class ExperimentReport:
    config: dict
    cells: list[dict]
    verdicts: list[Verdict]
    tables: dict[str, list[dict]]
    wall_clock: float = 0.0

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def verdict(self, vid: str) -> Verdict:
        return next(v for v in self.verdicts if v.id == vid)

    def to_record(self) -> dict:
        return {"config": self.config, "cells": self.cells,
                "verdicts": [asdict(v) for v in self.verdicts], "wall_clock": self.wall_clock}

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_record()), indent=2, sort_keys=True)

    def csv_tables(self) -> dict[str, str]:
        out = {"cells": _to_csv(self.cells),
               "verdicts": _to_csv([asdict(v) for v in self.verdicts])}
        out.update({name: _to_csv(rows) for name, rows in self.tables.items()})
        return out

    def write(self, outdir) -> list[Path]:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        stem = self.config["experiment"].lower()
        files = {f"{stem}.json": self.to_json()}
        files.update({f"{stem}_{name}.csv": text for name, text in self.csv_tables().items()})
        paths = []
        for name, text in files.items():
            paths.append(_atomic_write(outdir / name, text))
        return paths


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(v) for k, v in row.items()})
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> Path:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "reports"))


# shared pieces


def frequency_limit(delta: float, trials: int) -> float:
    """Tolerated failure frequency: ``delta`` plus a 3-sigma binomial allowance."""
    return delta + 3 * math.sqrt(delta * (1 - delta) / trials)


def trial_rng(seed: int, m: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, m, trial])


def summarize(values) -> dict:
    v = np.asarray(values, dtype=float)
    q = np.quantile(v, [0.05, 0.5, 0.95])
    return {"mean": float(v.mean()), "median": float(q[1]), "q05": float(q[0]), "q95": float(q[2])}


def _flat(prefix: str, stats: dict) -> dict:
    return {f"{prefix}_{k}": v for k, v in stats.items()}


def abstain_bound(world: SyntheticWorld, r0: float) -> float:
    """``theta_{f*}(r0) * r0`` with the analytic coefficient.

    Radii above 1 cover the whole class, where the ball mass stops growing,
    so the product is the ball mass at radius 1.
    """
    if r0 >= 1:
        hyps, _ = world.all_true_minimizers()
        return max(disagreement.ball_disagreement_mass(world.space, world, f, 1.0) for f in hyps)
    return disagreement.theta_star(world, r0) * r0


def train(algorithm: str, space, sample, delta, seed):
    if algorithm == LESS:
        return selective.train_less(space, sample, delta)
    if algorithm == ILESS:
        return selective.train_iless(space, sample, delta)
    if algorithm == BATCH:
        return active.run_batch_iless(space, sample, delta, seed)
    raise ValueError(f"{algorithm} does not produce a selective classifier")


def rejection_r0(algorithm: str, m, delta, d, r_star) -> float:
    if algorithm == BATCH:
        return bounds.batch_r0_radius(m, delta, d, r_star)
    return bounds.r0_radius(m, delta, d, r_star)


def deviation_event(world: SyntheticWorld, sample, delta: float) -> bool:
    """Whether both deviation inequalities hold over the sample's canonical hypotheses.

    For thresholds every piece of constant empirical risk is checked at both
    parameter ends, where the true risk is extreme, so the check covers every
    real threshold.
    """
    space = world.space
    prof = space.profile(sample)
    m = len(sample)
    d = space.vc_dimension
    if isinstance(space, ThresholdSpace) and world.target is not None:
        u = prof.u
        lo = np.concatenate([[-np.inf], u])
        hi = np.concatenate([u, [np.inf]])
        r_hat = np.concatenate([prof.counts, prof.counts]) / m
        r_true = world.threshold_risks(np.concatenate([lo, hi]))
    else:
        hyps, counts = prof.canonical()
        r_hat = np.asarray(counts) / m
        r_true = world.true_risks(hyps)
    return bool(np.all(bounds.deviation_holds(m, delta, d, np.clip(r_true, 0, 1), r_hat)))


def covered_disagreement(sc, world, probes) -> bool:
    """Whether some covered probe point is predicted against a true risk minimizer."""
    covered = ~sc.abstains(probes)
    if not covered.any():
        return False
    pred = sc.space.predict(sc.predictor, probes[covered])
    hyps, _ = world.all_true_minimizers()
    return any(np.any(world.space.predict(f, probes[covered]) != pred) for f in hyps)


# runners


def _finish(cfg, cells, verdicts, tables, started) -> ExperimentReport:
    return ExperimentReport(cfg.to_record(), cells, verdicts, tables, time.perf_counter() - started)


def run_rejection_curve(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    world = cfg.world_obj()
    space, d, r_star = world.space, world.space.vc_dimension, world.r_star
    rows, cells = [], []
    for m in cfg.m_grid:
        r0 = rejection_r0(cfg.algorithm, m, cfg.delta, d, r_star)
        bound = abstain_bound(world, r0)
        cell_rows = []
        for trial in range(cfg.trials):
            sample = world.sample(m, trial_rng(cfg.seed, m, trial))
            sc = train(cfg.algorithm, space, sample, cfg.delta, [cfg.seed, m, trial])
            mass = selective.exact_abstain_mass(space, sc, world)
            cell_rows.append({"m": m, "trial": trial, "radius": sc.low_error_set.radius,
                              "abstain_mass": mass, "r0": r0, "bound": bound, "holds": mass <= bound})
        rows.extend(cell_rows)
        masses = [r["abstain_mass"] for r in cell_rows]
        cells.append({"m": m, **_flat("abstain", summarize(masses)),
                      **_flat("radius", summarize([r["radius"] for r in cell_rows])),
                      "r0": r0, "theta_r0_bound": bound,
                      "violation_rate": float(np.mean([not r["holds"] for r in cell_rows]))})
    verdicts = []
    if cfg.algorithm in (ILESS, BATCH):
        limit = frequency_limit(cfg.delta, cfg.trials)
        worst = max(c["violation_rate"] for c in cells)
        verdicts.append(Verdict("abstain-bound", "abstain mass <= theta_f*(R0) R0 in >= 1-delta of trials",
                                worst <= limit, worst, limit))
    return _finish(cfg, cells, verdicts, {"trials": rows}, started)


def run_label_curve(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    world = cfg.world_obj()
    space, d, r_star = world.space, world.space.vc_dimension, world.r_star
    labels, rates = active.label_counts(space, world, cfg.delta, cfg.m_grid, cfg.trials, cfg.seed)
    theta_cap = disagreement.theta_star(world, max(r_star, 1.0 / cfg.m_grid[-1]))
    rows, cells = [], []
    for i, m in enumerate(cfg.m_grid):
        bound = bounds.active_label_bound(m, cfg.delta, d, r_star, theta_cap)
        for trial in range(cfg.trials):
            rows.append({"m": m, "trial": trial, "labels": int(labels[i, trial]),
                         "round_rate": float(rates[i, trial]), "bound": bound})
        cells.append({"m": m, **_flat("labels", summarize(labels[i])), **_flat("rate", summarize(rates[i])),
                      "label_bound": bound, "theta_cap": theta_cap,
                      "bound_violation_rate": float(np.mean(labels[i] > bound))})
    limit = frequency_limit(cfg.delta, cfg.trials)
    worst = max(c["bound_violation_rate"] for c in cells)
    verdicts = [Verdict("label-bound", "labels <= label-complexity bound in >= 1-delta of runs",
                        worst <= limit, worst, limit)]
    # request rates: nonincreasing within pooled binomial error
    excess = []
    for i in range(len(cfg.m_grid) - 1):
        p0, p1 = rates[i].mean(), rates[i + 1].mean()
        n0 = max(cfg.m_grid[i] // 2, 1) * cfg.trials
        n1 = max(cfg.m_grid[i + 1] // 2, 1) * cfg.trials
        se = math.sqrt(max(p0 * (1 - p0), 1e-12) / n0 + max(p1 * (1 - p1), 1e-12) / n1)
        excess.append((p1 - p0) / max(se, 1e-12) - 3)
    if excess:
        worst_excess = max(excess)
        verdicts.append(Verdict("rate-nonincreasing", "per-round request rate nonincreasing in m within 3 sigma",
                                worst_excess <= 0, worst_excess, 0.0))
    if r_star == 0 and len(cfg.m_grid) > 1:
        first = np.median(labels[0]) / cfg.m_grid[0]
        last = np.median(labels[-1]) / cfg.m_grid[-1]
        verdicts.append(Verdict("sublinear", "labels(m_max)/m_max <= 0.5 labels(m_min)/m_min (medians)",
                                last <= 0.5 * first, last, 0.5 * first))
    return _finish(cfg, cells, verdicts, {"trials": rows}, started)


def run_competitive_check(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    world = cfg.world_obj()
    space = world.space
    force_zero = cfg.options.get("force_zero_radius", "false").strip().lower() in ("1", "true", "yes")
    probes = world.marginal.grid(int(cfg.options.get("probes", PROBE_POINTS)))
    hyps, _ = world.all_true_minimizers()
    rows, cells = [], []
    for m in cfg.m_grid:
        cell_rows = []
        for trial in range(cfg.trials):
            sample = world.sample(m, trial_rng(cfg.seed, m, trial))
            sc = train(cfg.algorithm, space, sample, cfg.delta, [cfg.seed, m, trial])
            if force_zero:
                sc = selective.with_radius(sc, 0.0)
            member = all(sc.low_error_set.contains(f) for f in hyps)
            cell_rows.append({"m": m, "trial": trial, "all_minimizers_in_set": member,
                              "covered_disagreement": covered_disagreement(sc, world, probes)})
        rows.extend(cell_rows)
        cells.append({"m": m,
                      "membership_failure_rate": float(np.mean([not r["all_minimizers_in_set"] for r in cell_rows])),
                      "disagreement_rate": float(np.mean([r["covered_disagreement"] for r in cell_rows]))})
    limit = frequency_limit(cfg.delta, cfg.trials)
    worst_mem = max(c["membership_failure_rate"] for c in cells)
    worst_dis = max(c["disagreement_rate"] for c in cells)
    verdicts = [
        Verdict("minimizers-retained", "every true risk minimizer in the low-error set in >= 1-delta of trials",
                worst_mem <= limit, worst_mem, limit),
        Verdict("pointwise-competitive", "no covered probe disagrees with a minimizer in >= 1-delta of trials",
                worst_dis <= limit, worst_dis, limit),
    ]
    return _finish(cfg, cells, verdicts, {"trials": rows}, started)


def run_equivalence_check(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    world = cfg.world_obj()
    space = world.space
    n_probe = int(cfg.options.get("probes", 100))
    rows, cells = [], []
    for m in cfg.m_grid:
        cell_rows = []
        for trial in range(cfg.trials):
            rng = trial_rng(cfg.seed, m, trial)
            sample = world.sample(m, rng)
            sc, rep = active.batch_iless_run(space, sample, cfg.delta, [cfg.seed, m, trial])
            probes = world.sample_x(n_probe, rng)
            matches = int(np.sum(sc.abstains(probes) == selective.brute_force_disagreement(rep.final_set, probes)))
            row = {"m": m, "trial": trial, "probes": n_probe, "matches": matches}
            row.update(_final_round_audit(rep, world, cfg.delta))
            cell_rows.append(row)
        rows.extend(cell_rows)
        audited = [r for r in cell_rows if r["audited"]]
        cells.append({"m": m, "matches": sum(r["matches"] for r in cell_rows),
                      "probes": n_probe * cfg.trials,
                      "undershoot_rate": float(np.mean([r["undershoot"] for r in audited])) if audited else 0.0})
    total = sum(c["matches"] for c in cells)
    possible = sum(c["probes"] for c in cells)
    limit = frequency_limit(cfg.delta, cfg.trials)
    worst = max(c["undershoot_rate"] for c in cells)
    verdicts = [
        Verdict("batch-equals-final-dis", "Batch-ILESS abstains exactly on the final set's disagreement region",
                total == possible, float(total), float(possible)),
        Verdict("final-round-chernoff", "final-round requests below the lower-tail deviation in <= delta of trials",
                worst <= limit, worst, limit),
    ]
    return _finish(cfg, cells, verdicts, {"trials": rows}, started)


def _final_round_audit(rep, world, delta) -> dict:
    """Compare the last round's request count with its expectation.

    The last round's requests are Binomial(L, p) with ``p`` the exact
    disagreement mass of the set committed before it.
    """
    if len(rep.committed) < 2 or rep.per_round[-1].t != rep.t_final:
        return {"audited": False, "request_prob": float("nan"), "requested": 0, "length": 0,
                "lower_limit": float("nan"), "undershoot": False, "prob_upper": float("nan")}
    prev = rep.committed[-2]
    p = selective.disagreement_mass(prev, world)
    last = rep.per_round[-1]
    length = last.batch_size
    mu = p * length
    alpha = bounds.chernoff_lower_alpha(mu, delta)
    lower = (1 - alpha) * mu if math.isfinite(alpha) else 0.0
    return {"audited": True, "request_prob": p, "requested": last.labels_in_round, "length": length,
            "lower_limit": lower, "undershoot": last.labels_in_round < lower,
            "prob_upper": bounds.request_mass_upper(last.labels_in_round, length, delta)}


def run_bound_audit(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    world = cfg.world_obj()
    space, d, r_star = world.space, world.space.vc_dimension, world.r_star
    rows, cells = [], []
    for m in cfg.m_grid:
        cap = bounds.iless_radius_cap(m, cfg.delta, d, r_star)
        r0 = bounds.r0_radius(m, cfg.delta, d, r_star)
        bound = abstain_bound(world, r0)
        cell_rows = []
        for trial in range(cfg.trials):
            sample = world.sample(m, trial_rng(cfg.seed, m, trial))
            sc = selective.train_iless(space, sample, cfg.delta)
            event = deviation_event(world, sample, cfg.delta)
            mass = selective.exact_abstain_mass(space, sc, world)
            radius = sc.low_error_set.radius
            cell_rows.append({"m": m, "trial": trial, "event_e": event, "radius": radius, "radius_cap": cap,
                              "radius_ok": radius <= cap, "abstain_mass": mass, "abstain_bound": bound,
                              "abstain_ok": mass <= bound})
        rows.extend(cell_rows)
        in_e = [r for r in cell_rows if r["event_e"]]
        cells.append({"m": m, "e_failure_rate": 1 - len(in_e) / len(cell_rows),
                      "radius_cap": cap, "r0": r0, "abstain_bound": bound,
                      "radius_cap_held": sum(r["radius_ok"] for r in in_e),
                      "abstain_bound_held": sum(r["abstain_ok"] for r in in_e), "e_trials": len(in_e),
                      **_flat("abstain", summarize([r["abstain_mass"] for r in cell_rows]))})
    limit = frequency_limit(cfg.delta, cfg.trials)
    worst = max(c["e_failure_rate"] for c in cells)
    e_trials = sum(c["e_trials"] for c in cells)
    radius_held = sum(c["radius_cap_held"] for c in cells)
    abstain_held = sum(c["abstain_bound_held"] for c in cells)
    verdicts = [
        Verdict("event-e-frequency", "deviation event fails in <= delta of trials", worst <= limit, worst, limit),
        Verdict("radius-cap", "ILESS radius <= 6A/m + 3 sqrt(A R*/m) in every trial inside the event",
                radius_held == e_trials, float(radius_held), float(e_trials)),
        Verdict("abstain-bound", "abstain mass <= theta_f*(R0) R0 in every trial inside the event",
                abstain_held == e_trials, float(abstain_held), float(e_trials)),
    ]
    return _finish(cfg, cells, verdicts, {"trials": rows}, started)


def run_theta_scan(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    world = cfg.world_obj()
    space = world.space
    r0s = [float(v) for v in cfg.options.get("r0_grid", "0.01, 0.05, 0.1").split(",")]
    n_mc = int(cfg.options.get("mc_samples", 0))
    tol = float(cfg.options.get("mc_tolerance", 0.05))
    hyps, _ = world.all_true_minimizers()
    rows, cells = [], []
    monotone, mc_ok = True, True
    for f in hyps:
        for r0 in r0s:
            est = disagreement.theta_f(space, world, f, r0)
            prod = est.theta_at * est.r_grid
            # grid is descending: the product must not increase as r shrinks
            monotone &= bool(np.all(np.diff(prod) <= 1e-12))
            cell = {"f": str(f.params), "r0": r0, "theta": est.value}
            if n_mc:
                mc = disagreement.theta_f(space, world, f, r0, method=disagreement.MONTE_CARLO,
                                          n=n_mc, seed=cfg.seed)
                cell["theta_mc"] = mc.value
                cell["mc_error"] = abs(mc.value - est.value)
                mc_ok &= cell["mc_error"] <= tol
            cells.append(cell)
            rows.extend({"f": str(f.params), "r0": r0, "r": float(r), "delta_b": float(b),
                         "theta_at": float(t)} for r, b, t in zip(est.r_grid, est.delta_b, est.theta_at))
    verdicts = [Verdict("theta-r-monotone", "theta_f(r) r nondecreasing in r", monotone, float(monotone), 1.0)]
    if n_mc:
        worst = max(c["mc_error"] for c in cells)
        verdicts.append(Verdict("mc-agreement", "Monte-Carlo coefficient within tolerance of the analytic one",
                                mc_ok, worst, tol))
    return _finish(cfg, cells, verdicts, {"grid": rows}, started)


RUNNERS = {
    REJECTION_CURVE: run_rejection_curve,
    LABEL_CURVE: run_label_curve,
    COMPETITIVE_CHECK: run_competitive_check,
    EQUIVALENCE_CHECK: run_equivalence_check,
    BOUND_AUDIT: run_bound_audit,
    THETA_SCAN: run_theta_scan,
}


def run(cfg: ExperimentConfig) -> ExperimentReport:
    return RUNNERS[cfg.validate().experiment](cfg)
