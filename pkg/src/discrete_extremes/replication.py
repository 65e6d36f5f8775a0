"""Reproduction of the simulation studies and the multiple-births analysis."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from types import MappingProxyType

import numpy as np

from .distributions import DGPD, GPD, GZD, InverseGamma, NegBinomial, Poisson
from .gof import QqData, qq_points
from .mle import FitResult, GroupedCounts, confint, fit
from .parallel import parallel_map
from .pot import ExceedanceSample, exceedances, select_threshold, tail_probability
from .rng import RngStream
from .special import log_hurwitz_zeta

# ---------------------------------------------------------------------------
# Poisson example


@dataclass
class PoissonIntroResult:
    rate: float
    threshold: int
    n: int
    seeds: int
    mean_sigma: dict[str, float]
    mean_xi: dict[str, float]
    n_failed: dict[str, int]
    qq: dict[str, QqData] = field(default_factory=dict, repr=False)


POISSON_INTRO_METHODS = {"gpd": GPD(0.0), "dgpd": DGPD(), "gzd": GZD()}


def _poisson_intro_rep(args):
    rate, n, u, stream = args
    x = Poisson().sample((rate,), n, stream)
    sample = exceedances(x, u)
    out = {}
    for name, fam in POISSON_INTRO_METHODS.items():
        r = fit(fam, sample.exceedances, with_covariance=False)
        out[name] = (r.estimates[0], r.estimates[1], r.converged)
    return out


def poisson_intro_experiment(n: int = 5000, rate: float = 1.0, u: int = 3, seeds: int = 20,
                             rng: RngStream | None = None, qq_sims: int = 0,
                             workers: int | None = None) -> PoissonIntroResult:
    """Fit GPD (no continuity correction), D-GPD and GZD to Poisson exceedances
    over ``u`` for ``seeds`` independent samples and average the estimates.

    QQ data are built from the first sample.
    """
    if n < 100:
        raise ValueError("n must be at least 100")
    if seeds < 1:
        raise ValueError("seeds must be positive")
    rng = rng if rng is not None else RngStream(2017)
    reps = parallel_map(_poisson_intro_rep, [(rate, n, u, rng.child(s)) for s in range(seeds)], workers)
    mean_sigma, mean_xi, failed = {}, {}, {}
    for name in POISSON_INTRO_METHODS:
        vals = np.array([r[name][:2] for r in reps])
        mean_sigma[name] = float(vals[:, 0].mean())
        mean_xi[name] = float(vals[:, 1].mean())
        failed[name] = sum(not r[name][2] for r in reps)
    x0 = Poisson().sample((rate,), n, rng.child(0))
    sample0 = exceedances(x0, u)
    qq = {}
    for name, fam in POISSON_INTRO_METHODS.items():
        r = fit(fam, sample0.exceedances, with_covariance=False)
        qq[name] = qq_points(sample0.exceedances, r, n_sims=qq_sims, rng=rng.child(10**6))
    return PoissonIntroResult(rate, u, n, seeds, mean_sigma, mean_xi, failed, qq)


# ---------------------------------------------------------------------------
# inverse-gamma experiment

TABLE1_METHODS = ("gpd_y", "dgpd", "gzd", "gpd_delta_0.5", "gpd_delta_0")
TABLE1_LABELS = {
    "gpd_y": "GPD on Y",
    "dgpd": "D-GPD",
    "gzd": "GZD",
    "gpd_delta_0.5": "GPD delta=1/2",
    "gpd_delta_0": "GPD delta=0",
}
_TABLE1_FAMILIES = {
    "gpd_y": GPD(0.0),
    "dgpd": DGPD(),
    "gzd": GZD(),
    "gpd_delta_0.5": GPD(0.5),
    "gpd_delta_0": GPD(0.0),
}


@dataclass(frozen=True)
class Table1Truth:
    q_e: float
    m: int
    p_e: float
    xi: float = 0.5


def table1_truth(alpha: float = 2.0, beta: float = 1.0, level: float = 1e-4) -> Table1Truth:
    """q_e with P(Y > q_e) = level for Y ~ IG(alpha, beta); target P(Y >= floor(q_e))."""
    ig = InverseGamma(alpha, beta)
    q = float(ig.isf(level))
    m = math.floor(q)
    return Table1Truth(q, m, float(ig.sf(m)), 1.0 / alpha)


@dataclass
class MethodSummary:
    method: str
    label: str
    p_e_mean: float
    p_e_coverage: float
    p_e_length: float
    p_e_true_length: float
    xi_mean: float
    xi_coverage: float
    xi_length: float
    sigma_mean: float
    sigma_length: float
    n_valid: int
    n_failed: int


@dataclass
class ExperimentSummary:
    """Table-1 style aggregate.  p_e quantities are scaled by 1e3."""

    methods: list[MethodSummary]
    reps: int
    n: int
    seed: int
    stream_id: int
    truth: Table1Truth
    level: float
    mean_threshold: float
    mean_exceedances: float
    records: list[dict] = field(default_factory=list, repr=False)

    def row(self, method: str) -> MethodSummary:
        for m in self.methods:
            if m.method == method:
                return m
        raise KeyError(method)

    def to_dict(self, include_records: bool = False) -> dict:
        d = {
            "schema": "1",
            "experiment": "table1",
            "reps": self.reps,
            "n": self.n,
            "seed": self.seed,
            "stream_id": self.stream_id,
            "level": self.level,
            "truth": {"q_e": self.truth.q_e, "m": self.truth.m,
                      "p_e_x1e3": self.truth.p_e * 1e3, "xi": self.truth.xi},
            "mean_threshold": self.mean_threshold,
            "mean_exceedances": self.mean_exceedances,
            "methods": [asdict(m) for m in self.methods],
        }
        if include_records:
            d["records"] = self.records
        return d

    def to_json(self, include_records: bool = False) -> str:
        return json.dumps(_finite(self.to_dict(include_records)), indent=2, allow_nan=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(asdict(self.methods[0]).keys())
        w = csv.DictWriter(buf, fieldnames=names, lineterminator="\n")
        w.writeheader()
        for m in self.methods:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in asdict(m).items()})
        return buf.getvalue()


def _finite(obj):
    """Replace NaN/inf by None so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _nan_record():
    return {"p_e": math.nan, "p_lo": math.nan, "p_hi": math.nan, "xi": math.nan,
            "xi_lo": math.nan, "xi_hi": math.nan, "sigma": math.nan, "sigma_lo": math.nan,
            "sigma_hi": math.nan, "converged": False}


def _table1_rep(args) -> dict:
    n, stream, truth, level, percentile = args
    y = InverseGamma(2.0, 1.0).sample(n, stream)
    x = np.floor(y).astype(np.int64)
    u = select_threshold(x, percentile)
    sample = exceedances(x, u)
    y_exc = y[y >= u] - u
    out = {"u": u, "n_exceed": sample.n_exceed}
    for name in TABLE1_METHODS:
        fam = _TABLE1_FAMILIES[name]
        data = y_exc if name == "gpd_y" else sample.exceedances
        try:
            r = fit(fam, data)
        except (ValueError, FloatingPointError):
            out[name] = _nan_record()
            continue
        rec = _nan_record()
        rec.update(sigma=r.estimates[0], xi=r.estimates[1], converged=r.converged,
                   boundary=r.boundary)
        est = tail_probability(r, sample, truth.m, level=level)
        rec.update(p_e=est.p_e_hat, p_lo=est.ci[0], p_hi=est.ci[1])
        if r.covariance is not None:
            rec["xi_lo"], rec["xi_hi"] = confint(r, level, "xi")
            rec["sigma_lo"], rec["sigma_hi"] = confint(r, level, "sigma")
        out[name] = rec
    return out


def _summarize(method: str, recs: list[dict], truth: Table1Truth, level: float) -> MethodSummary:
    p = np.array([r["p_e"] for r in recs])
    plo = np.array([r["p_lo"] for r in recs])
    phi = np.array([r["p_hi"] for r in recs])
    xi = np.array([r["xi"] for r in recs])
    xlo = np.array([r["xi_lo"] for r in recs])
    xhi = np.array([r["xi_hi"] for r in recs])
    sg = np.array([r["sigma"] for r in recs])
    slo = np.array([r["sigma_lo"] for r in recs])
    shi = np.array([r["sigma_hi"] for r in recs])
    valid = np.isfinite(plo) & np.isfinite(phi)
    xvalid = np.isfinite(xlo) & np.isfinite(xhi)
    failed = sum(not r["converged"] for r in recs)

    def mean(a, mask=None):
        a = a[np.isfinite(a)] if mask is None else a[mask]
        return float(a.mean()) if a.size else math.nan

    def cover(lo, hi, t, mask):
        return float(np.mean((lo[mask] <= t) & (t <= hi[mask]))) if mask.any() else math.nan

    pe_ok = np.isfinite(p)
    # smallest symmetric estimate-centered width holding the truth `level` of the time
    true_len = 2.0 * float(np.quantile(np.abs(p[pe_ok] - truth.p_e), level)) if pe_ok.any() else math.nan
    return MethodSummary(
        method=method,
        label=TABLE1_LABELS[method],
        p_e_mean=mean(p) * 1e3,
        p_e_coverage=cover(plo, phi, truth.p_e, valid),
        p_e_length=mean(phi - plo, valid) * 1e3,
        p_e_true_length=true_len * 1e3,
        xi_mean=mean(xi),
        xi_coverage=cover(xlo, xhi, truth.xi, xvalid),
        xi_length=mean(xhi - xlo, xvalid),
        sigma_mean=mean(sg),
        sigma_length=mean(shi - slo, np.isfinite(slo) & np.isfinite(shi)),
        n_valid=int(valid.sum()),
        n_failed=failed,
    )


def table1_experiment(reps: int = 200, n: int = 8000, percentile: float = 0.95,
                      rng: RngStream | None = None, level: float = 0.9,
                      workers: int | None = None) -> ExperimentSummary:
    """Inverse-gamma tail experiment.

    Each replicate draws Y ~ IG(2, 1), sets X = floor(Y), thresholds at the
    empirical ``percentile`` of X and estimates P(X >= floor(q_e)) with every
    method; replicate r uses ``rng.child(r)``.
    """
    if reps < 1:
        raise ValueError("reps must be positive")
    if n < 1000:
        raise ValueError("n must be at least 1000")
    rng = rng if rng is not None else RngStream(1)
    truth = table1_truth()
    jobs = [(n, rng.child(r), truth, level, percentile) for r in range(reps)]
    records = parallel_map(_table1_rep, jobs, workers)
    methods = [_summarize(m, [r[m] for r in records], truth, level) for m in TABLE1_METHODS]
    return ExperimentSummary(
        methods=methods,
        reps=reps,
        n=n,
        seed=rng.seed,
        stream_id=rng.stream_id,
        truth=truth,
        level=level,
        mean_threshold=float(np.mean([r["u"] for r in records])),
        mean_exceedances=float(np.mean([r["n_exceed"] for r in records])),
        records=records,
    )


# ---------------------------------------------------------------------------
# multiple births

# Deliveries by number of children born; the censored cell holds
# quintuplets or more.
BIRTHS_FIXTURE = MappingProxyType({1: 78_178_588, 2: 2_500_340, 3: 117_603, 4: 8_108})
BIRTHS_CENSORED = (5, 1_353)
BIRTHS_FAMILIES = {"dgpd": DGPD(), "gzd": GZD(), "negbinomial": NegBinomial(), "poisson": Poisson()}


def births_counts() -> GroupedCounts:
    return GroupedCounts.from_mapping(BIRTHS_FIXTURE, censor=BIRTHS_CENSORED)


@dataclass
class BirthsTable:
    threshold: int
    sample: ExceedanceSample
    fits: dict[str, FitResult]

    def to_dict(self) -> dict:
        rows = {}
        for name, r in self.fits.items():
            rows[name] = {
                "estimates": r.params,
                "se": dict(zip(r.param_names, r.se.tolist())) if r.se is not None else None,
                "nll": r.nll,
                "bic": r.bic,
                "aic": r.aic,
                "n": r.n,
                "converged": r.converged,
            }
        return {"schema": "1", "experiment": "births", "threshold": self.threshold,
                "n_total": self.sample.n_total, "n_exceed": self.sample.n_exceed,
                "censored_at": self.sample.exceedances.censor, "fits": rows}


def births_analysis(threshold: int = 2) -> BirthsTable:
    """Right-censored fits to the multiple-birth tail.

    The threshold is in children per delivery: the default 2 models deliveries
    of twins or more, with exceedance k = children - 2 and the quintuplet cell
    censored at k >= 3.
    """
    sample = exceedances(births_counts(), threshold)
    fits = {name: fit(fam, sample.exceedances) for name, fam in BIRTHS_FAMILIES.items()}
    return BirthsTable(threshold, sample, fits)


# ---------------------------------------------------------------------------
# Zipf-Mandelbrot exceedance ratio


def theorem1_ratio_check(s: float, u: int, k_max: int = 10) -> float:
    """max_{k <= k_max} |P(X = u+k | X >= u) / p_GZD(k; xi*u, xi) - 1| for X
    Zipf-Mandelbrot with exponent s and offset 1, xi = 1/(s-1).

    Both laws are power laws in k: P(X = u+k | X >= u) = (u+k+1)^-s / H(s, u+1)
    and p_GZD(k; xi*u, xi) = (u+k)^-s / H(s, u).
    """
    if not s > 1:
        raise ValueError("s must exceed 1")
    if u < 1:
        raise ValueError("u must be at least 1")
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    k = np.arange(k_max + 1, dtype=float)
    log_ratio = (
        -s * np.log1p(1.0 / (u + k))
        + log_hurwitz_zeta(s, float(u))
        - log_hurwitz_zeta(s, float(u + 1))
    )
    return float(np.max(np.abs(np.expm1(log_ratio))))
