"""Goodness of fit for discrete tail models.

The Kolmogorov-Smirnov statistic is computed on the integer lattice and its
p-value by parametric bootstrap.  QQ data pair empirical quantiles with model
quantiles at plotting positions i/(n+1), with an optional simulated envelope.
Continuous GPD fits are compared with integer data through their
discretization P(k) = F(k+1) - F(k), i.e. the data are treated as rounded
down draws of the fitted law.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .mle import FitOptions, FitResult, GroupedCounts, fit as fit_model
from .parallel import parallel_map
from .rng import RngStream


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    mc_replicates: int
    refit: bool
    n_failed: int = 0


@dataclass(frozen=True)
class QqData:
    positions: np.ndarray
    empirical: np.ndarray
    model: np.ndarray
    lower: np.ndarray | None
    upper: np.ndarray | None
    level: float
    n_sims: int

    @property
    def points(self):
        return list(zip(self.empirical.tolist(), self.model.tolist()))

    @property
    def envelope(self):
        if self.lower is None:
            return None
        return list(zip(self.lower.tolist(), self.upper.tolist()))

    def inside_fraction(self) -> float:
        """Share of empirical quantiles inside the envelope."""
        if self.lower is None:
            raise ValueError("no envelope was simulated")
        ok = (self.empirical >= self.lower) & (self.empirical <= self.upper)
        return float(ok.mean())


def _as_grouped(data) -> GroupedCounts:
    return data if isinstance(data, GroupedCounts) else GroupedCounts.from_values(data)


def _cdf_of(model):
    if isinstance(model, FitResult):
        fam, theta = model.family, model.tail_theta() if model.has_covariate else model.estimates
        return lambda k: fam.cdf(k, theta)
    if callable(model):
        return model
    fam, theta = model
    return lambda k: fam.cdf(k, theta)


def ks_statistic(data, model) -> float:
    """sup_k |F_n(k) - F(k)| over integers k >= 0.

    ``model`` is a FitResult, a ``(family, params)`` pair or a vectorized cdf.
    The supremum is attained at observed values or their predecessors.  With
    right-censored data only points below the censoring value are used.
    """
    g = _as_grouped(data)
    if g.total == 0:
        raise ValueError("ks_statistic needs data")
    cdf = _cdf_of(model)
    pts = np.union1d(g.values, g.values[g.values > 0] - 1)
    if g.censor is not None:
        pts = pts[pts < g.censor[0]]
    cum = np.cumsum(g.counts)
    idx = np.searchsorted(g.values, pts, side="right")
    fn = np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0) / g.total
    f = np.asarray(cdf(pts.astype(float)), dtype=float)
    return float(np.max(np.abs(fn - f)))


def _simulate_like(family, theta, g: GroupedCounts, rng: RngStream) -> GroupedCounts:
    sim = np.asarray(family.sample(theta, g.total, rng))
    if not family.discrete:
        sim = np.floor(sim)
    sim = sim.astype(np.int64)
    if g.censor is None:
        return GroupedCounts.from_values(sim)
    c = g.censor[0]
    explicit = sim[sim < c]
    v, n = np.unique(explicit, return_counts=True)
    return GroupedCounts(v, n, (c, int(np.sum(sim >= c))))


def _ks_replicate(args):
    family, theta, g, rng, refit, tol = args
    sim = _simulate_like(family, theta, g, rng)
    if refit:
        r = fit_model(family, sim, FitOptions(start=theta, tolerance=tol), with_covariance=False)
        if not math.isfinite(r.nll):
            return math.nan
        return ks_statistic(sim, r)
    return ks_statistic(sim, (family, theta))


def ks_pvalue(data, family, fit: FitResult, B: int = 1000, refit: bool = True,
              rng: RngStream | None = None, workers: int | None = None,
              refit_tolerance: float = 1e-8) -> KsResult:
    """Parametric-bootstrap p-value (1 + #{D_b >= D_obs}) / (B + 1).

    Replicate b draws from ``rng.child(b)``, so serial and parallel runs agree.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    if fit.has_covariate:
        raise ValueError("KS test is not defined for covariate-dependent fits")
    rng = rng if rng is not None else RngStream(0)
    g = _as_grouped(data)
    d_obs = ks_statistic(g, fit)
    theta = tuple(fit.estimates)
    jobs = [(family, theta, g, rng.child(b), refit, refit_tolerance) for b in range(B)]
    stats = np.array(parallel_map(_ks_replicate, jobs, workers), dtype=float)
    failed = int(np.sum(~np.isfinite(stats)))
    exceed = int(np.sum(stats[np.isfinite(stats)] >= d_obs))
    return KsResult(d_obs, (1 + exceed) / (B + 1), B, refit, failed)


def qq_points(data, model: FitResult, n_sims: int = 2000, level: float = 0.9,
              rng: RngStream | None = None) -> QqData:
    """Model quantiles at i/(n+1) against sorted data, with a pointwise
    envelope from ``n_sims`` samples of size n from the fitted model."""
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    if n_sims < 0:
        raise ValueError("n_sims must be non-negative")
    if isinstance(data, GroupedCounts):
        if data.n_censored:
            raise ValueError("QQ data are undefined for censored samples")
        emp = data.expand().astype(float)
    else:
        emp = np.sort(np.asarray(data, dtype=float))
    n = emp.size
    if n == 0:
        raise ValueError("qq_points needs data")
    family = model.family
    theta = model.tail_theta() if model.has_covariate else tuple(model.estimates)
    pos = np.arange(1, n + 1) / (n + 1.0)
    mq = np.asarray(family.quantile(pos, theta), dtype=float)
    lo = hi = None
    if n_sims > 0:
        rng = rng if rng is not None else RngStream(0)
        sims = np.empty((n_sims, n))
        for j in range(n_sims):
            sims[j] = np.sort(np.asarray(family.sample(theta, n, rng.child(j)), dtype=float))
        a = 0.5 * (1.0 - level)
        lo = np.quantile(sims, a, axis=0, method="inverted_cdf")
        hi = np.quantile(sims, 1.0 - a, axis=0, method="inverted_cdf")
    return QqData(pos, emp, mq, lo, hi, level, n_sims)
