"""Peaks over threshold: threshold choice, exceedances and tail probabilities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mle import FitResult, GroupedCounts, parameter_bounds, wald_interval
from .optimize import fd_gradient


@dataclass(frozen=True)
class ExceedanceSample:
    threshold: int
    exceedances: GroupedCounts
    n_total: int

    @property
    def n_exceed(self) -> int:
        return self.exceedances.total

    @property
    def p_u_hat(self) -> float:
        return self.n_exceed / self.n_total


@dataclass(frozen=True)
class TailEstimate:
    m: int
    p_e_hat: float
    se: float
    ci: tuple[float, float]
    method: str
    level: float = 0.9


def select_threshold(data, percentile: float = 0.95) -> int:
    """Order statistic x_(ceil(n * percentile)), 1-indexed ascending."""
    if not 0 < percentile < 1:
        raise ValueError("percentile must lie in (0, 1)")
    if isinstance(data, GroupedCounts):
        if data.total == 0:
            raise ValueError("cannot select a threshold from empty data")
        if data.n_censored:
            raise ValueError("threshold selection needs uncensored data")
        rank = math.ceil(data.total * percentile)
        cum = np.cumsum(data.counts)
        return int(data.values[np.searchsorted(cum, rank)])
    x = np.asarray(data)
    if x.size == 0:
        raise ValueError("cannot select a threshold from empty data")
    rank = math.ceil(x.size * percentile)
    # partition is O(n); sort would do too but is slower for large samples
    return int(np.partition(x, rank - 1)[rank - 1])


def exceedances(data, u: int) -> ExceedanceSample:
    """Group x - u over observations x >= u."""
    u = int(u)
    g = data if isinstance(data, GroupedCounts) else GroupedCounts.from_values(data)
    if g.total == 0:
        raise ValueError("no data")
    exc = g.shifted(u)
    if exc.total == 0:
        raise ValueError(f"no observation reaches the threshold {u}")
    return ExceedanceSample(u, exc, g.total)


def exceedance_logsf(fit: FitResult, theta, k: float) -> float:
    """log P(excess >= k) under the fitted family at parameters ``theta``.

    Continuous GPD fits use the GPD survival at the integer gap itself.
    """
    return float(fit.family.logsf(float(k), theta))


def tail_probability(
    fit: FitResult,
    sample: ExceedanceSample,
    m: int,
    level: float = 0.9,
    binomial: bool = False,
    covariate_value: float = 1.0,
) -> TailEstimate:
    """Estimate P(X >= m) = p_u * S(m - u) with a delta-method interval.

    By default p_u is treated as known; ``binomial=True`` adds the
    p_u(1 - p_u)/n variance term.  The interval is clamped to [0, 1].
    """
    u = sample.threshold
    if m < u:
        raise ValueError(f"target m={m} lies below the threshold u={u}")
    gap = m - u
    pu = sample.p_u_hat
    theta_hat = np.asarray(fit.estimates, dtype=float)

    def surv(theta):
        if fit.has_covariate:
            s0, st, xi = theta
            t = (s0 + st * covariate_value, max(xi, 0.0))
        else:
            t = tuple(theta)
        if not fit.family.feasible(t):
            return math.nan
        return math.exp(exceedance_logsf(fit, t, gap))

    S = surv(theta_hat)
    p_e = pu * S
    if gap == 0 or fit.covariance is None:
        se = 0.0 if gap == 0 else math.nan
        if binomial:
            se = math.sqrt(se**2 + S**2 * pu * (1 - pu) / sample.n_total)
    else:
        lo, up = parameter_bounds(fit.family, fit.has_covariate)
        grad = fd_gradient(surv, theta_hat, lo, up)
        var = float(grad @ fit.covariance @ grad) * pu**2
        if binomial:
            var += S**2 * pu * (1 - pu) / sample.n_total
        se = math.sqrt(max(var, 0.0))
    if math.isfinite(se):
        lo_ci, hi_ci = wald_interval(p_e, se, level)
        ci = (min(max(lo_ci, 0.0), 1.0), min(max(hi_ci, 0.0), 1.0))
    else:
        ci = (math.nan, math.nan)
    return TailEstimate(int(m), p_e, se, ci, fit.family.label, level)
