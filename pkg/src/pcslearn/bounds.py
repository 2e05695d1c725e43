"""Closed-form slack terms, radii and tail bounds.

Everything here is a pure function evaluated in double precision. Values
above 1 are returned as computed; callers clamp only when they read a value
as a probability. Functions accept numpy arrays for the risk arguments so
that a bound can be evaluated over many hypotheses at once.

Naming follows the direction of the deviation being bounded:

* ``slack_true_minus_emp_*`` bounds ``R - R_hat`` (true risk above empirical)
* ``slack_emp_minus_true_*`` bounds ``R_hat - R``

and the suffix says which risk feeds the square root: ``hat`` uses the
empirical risk, ``bar`` the true risk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

TWO_E_MINUS_ONE = 2 * math.e - 1


def _check(m, delta, d):
    if not (isinstance(m, (int, np.integer, float)) and m >= 1):
        raise ValueError(f"sample size must be >= 1, got {m!r}")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta!r}")
    if not (d >= 1 and float(d).is_integer()):
        raise ValueError(f"VC dimension must be a positive integer, got {d!r}")


def _check_risk(r, name="risk"):
    arr = np.asarray(r, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > 1):
        raise ValueError(f"{name} must lie in [0, 1]")
    return arr


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


@dataclass(frozen=True)
class BoundValue:
    """A bound value with its named additive parts, for reports."""

    value: float
    components: dict = field(default_factory=dict)


def log_factor_A(m, delta, d) -> float:
    """``4 d ln(16 m e / (d delta))``."""
    _check(m, delta, d)
    return 4.0 * d * math.log(16.0 * m * math.e / (d * delta))


def slack_true_minus_emp_hat(m, delta, d, r_hat):
    _check(m, delta, d)
    r_hat = _check_risk(r_hat, "r_hat")
    a = log_factor_A(m, delta, d) / m
    return _out(a + np.sqrt(a * r_hat))


def slack_true_minus_emp_bar(m, delta, d, r_true):
    _check(m, delta, d)
    r_true = _check_risk(r_true, "r_true")
    a = log_factor_A(m, delta, d) / m
    return _out(np.sqrt(a * r_true))


def slack_emp_minus_true_hat(m, delta, d, r_hat):
    _check(m, delta, d)
    r_hat = _check_risk(r_hat, "r_hat")
    a = log_factor_A(m, delta, d) / m
    return _out(np.sqrt(a * r_hat))


def slack_emp_minus_true_bar(m, delta, d, r_true):
    """``A/m + sqrt(A r / m)``; the argument may exceed 1 when it is itself a bound."""
    _check(m, delta, d)
    r = np.asarray(r_true, dtype=float)
    if np.any(~np.isfinite(r)) or np.any(r < 0):
        raise ValueError("r_true must be finite and nonnegative")
    a = log_factor_A(m, delta, d) / m
    return _out(a + np.sqrt(a * r))


# short aliases matching the usual hat/bar notation
slack_hat_upper = slack_true_minus_emp_hat
slack_bar_upper = slack_true_minus_emp_bar
slack_hat_lower = slack_emp_minus_true_hat
slack_bar_lower = slack_emp_minus_true_bar


def slack_true_minus_emp(m, delta, d, r_true, r_hat):
    """Upper deviation slack: the smaller of the empirical and true forms."""
    return _out(np.minimum(slack_true_minus_emp_hat(m, delta, d, r_hat),
                           slack_true_minus_emp_bar(m, delta, d, r_true)))


def slack_emp_minus_true(m, delta, d, r_true, r_hat):
    """Lower deviation slack: the smaller of the true and empirical forms."""
    return _out(np.minimum(slack_emp_minus_true_bar(m, delta, d, r_true),
                           slack_emp_minus_true_hat(m, delta, d, r_hat)))


def deviation_holds(m, delta, d, r_true, r_hat) -> np.ndarray:
    """Whether both uniform-deviation inequalities hold for each (R, R_hat) pair."""
    r_true = np.asarray(r_true, dtype=float)
    r_hat = np.asarray(r_hat, dtype=float)
    upper = r_true <= r_hat + slack_true_minus_emp(m, delta, d, r_true, r_hat) + 1e-12
    lower = r_hat <= r_true + slack_emp_minus_true(m, delta, d, r_true, r_hat) + 1e-12
    return upper & lower


def sigma_less(m, delta, d) -> float:
    """Slack ``2 sqrt((2d ln(2me/d) + ln(2/delta)) / m)``; LESS uses twice this at ``delta/4``."""
    _check(m, delta, d)
    return 2.0 * math.sqrt((2 * d * math.log(2 * m * math.e / d) + math.log(2 / delta)) / m)


def less_radius(m, delta, d) -> float:
    return 2.0 * sigma_less(m, delta / 4, d)


def sigma_iless_parts(m, delta, d, r_hat_erm) -> BoundValue:
    _check(m, delta, d)
    r = float(_check_risk(r_hat_erm, "r_hat_erm"))
    a = log_factor_A(m, delta, d) / m
    sqrt_hat = math.sqrt(a * r)
    upper = a + sqrt_hat
    parts = {
        "A/m (upper)": a,
        "sqrt(A r/m)": sqrt_hat,
        "A/m (lower)": a,
        "sqrt(A (r + upper)/m)": math.sqrt(a * (r + upper)),
    }
    return BoundValue(sum(parts.values()), parts)


def sigma_iless(m, delta, d, r_hat_erm) -> float:
    """ILESS radius: upper slack at the ERM risk plus lower slack at its inflated value."""
    _check(m, delta, d)
    r = float(_check_risk(r_hat_erm, "r_hat_erm"))
    upper = slack_true_minus_emp_hat(m, delta, d, r)
    return upper + slack_emp_minus_true_bar(m, delta, d, r + upper)


def sigma_active(t, delta, d, r_hat_erm) -> float:
    """Active-ILESS radius at update point ``t``: ILESS on ``t/2`` points at ``delta/(2t)``."""
    if not (t >= 2 and t % 2 == 0):
        raise ValueError(f"update point must be an even integer >= 2, got {t!r}")
    return sigma_iless(t // 2, delta / (2 * t), d, r_hat_erm)


def iless_radius_cap(m, delta, d, r_star) -> float:
    """``6 A/m + 3 sqrt(A R*/m)``: the ILESS radius on the event where deviations hold."""
    _check(m, delta, d)
    r = float(_check_risk(r_star, "r_star"))
    a = log_factor_A(m, delta, d) / m
    return 6 * a + 3 * math.sqrt(a * r)


def r0_radius(m, delta, d, r_star) -> float:
    """``2 R* + 11 A/m + 6 sqrt(A R*/m)``: ball around f* that holds the ILESS set."""
    _check(m, delta, d)
    r = float(_check_risk(r_star, "r_star"))
    a = log_factor_A(m, delta, d) / m
    return 2 * r + 11 * a + 6 * math.sqrt(a * r)


def r0_radius_cap(m, delta, d, r_star) -> float:
    """Looser ``5 R* + 14 A/m``."""
    _check(m, delta, d)
    r = float(_check_risk(r_star, "r_star"))
    return 5 * r + 14 * log_factor_A(m, delta, d) / m


def batch_log_factor_B(m, delta, d) -> float:
    """``4 d ln(8 m^2 e / (d delta))`` for the batch reduction."""
    _check(m, delta, d)
    return 4.0 * d * math.log(8.0 * m * m * math.e / (d * delta))


def batch_r0_radius(m, delta, d, r_star) -> float:
    """``2 R* + 44 B/m + 12 sqrt(B R*/m)``."""
    r = float(_check_risk(r_star, "r_star"))
    b = batch_log_factor_B(m, delta, d) / m
    return 2 * r + 44 * b + 12 * math.sqrt(b * r)


def active_label_bound(m, delta, d, r_star, theta_cap) -> float:
    """Label count bound for Active-ILESS run at confidence ``delta`` with budget ``m``.

    ``theta_cap`` stands in for the polylog factor, a constant upper bound on
    the disagreement coefficient at radii above ``R*``. The guarantee is for
    a run at ``delta/2`` of a ``delta``-statement, so the run's own ``delta``
    is doubled before use.
    """
    _check(m, delta, d)
    full = min(2 * delta, 0.999999)
    a = log_factor_A(m, full, d)
    return (theta_cap * 2 * math.e * m * r_star + math.log2(2 / full)
            + 56 * math.e * math.log2(m) * a * theta_cap)


def chernoff_lower_tail(mu, alpha) -> float:
    """``exp(-mu alpha^2 / 2)`` bounds ``Pr(X < (1 - alpha) mu)``."""
    if mu < 0 or alpha < 0:
        raise ValueError("mu and alpha must be nonnegative")
    return math.exp(-mu * alpha * alpha / 2)


def chernoff_upper_tail(mu, alpha) -> float:
    """``2^(-mu alpha)`` bounds ``Pr(X > (1 + alpha) mu)`` for ``alpha >= 2e - 1``."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    if not alpha > TWO_E_MINUS_ONE:
        raise ValueError(f"upper-tail bound only established for alpha > 2e-1, got {alpha}")
    return 2.0 ** (-mu * alpha)


def chernoff_lower_alpha(mu, failure) -> float:
    """Deviation ``alpha`` at which the lower-tail bound equals ``failure``."""
    if mu <= 0:
        return math.inf
    return math.sqrt(2 * math.log(1 / failure) / mu)


def request_mass_upper(requested, length, failure) -> float:
    """Upper confidence bound on a request probability from a round's label count.

    Solves ``X >= (1 - alpha) p L`` for ``p`` with ``alpha`` set by the
    lower-tail bound at ``failure``.
    """
    lg = math.log(1 / failure)
    return (math.sqrt(lg) + math.sqrt(lg + 2 * requested)) ** 2 / (2 * length)


def confidence_partial_sums(delta, max_power) -> np.ndarray:
    """Partial sums of ``delta / (2t)`` over ``t = 2, 4, ..., 2^max_power``."""
    t = 2.0 ** np.arange(1, max_power + 1)
    return np.cumsum(delta / (2 * t))
