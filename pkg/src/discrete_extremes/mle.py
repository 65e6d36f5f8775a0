"""Maximum-likelihood fitting of tail and baseline families.

Data are held as :class:`GroupedCounts` (value -> count, plus an optional
right-censored cell).  Fits minimize the negative log-likelihood with a
Nelder-Mead simplex on log-transformed parameters; standard errors come from
the inverse of a finite-difference Hessian in natural parameters.
"""
from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .distributions import GPD, Family, _TailFamily
from .optimize import fd_hessian, nelder_mead
from .special import normal_quantile

SIGMA_FLOOR = 1e-8


@dataclass(frozen=True, eq=False)
class GroupedCounts:
    """Integer sample stored as sorted distinct values with their counts.

    ``censor = (c, m)`` records ``m`` further observations known only to be
    ``>= c``; ``c`` must exceed every explicit value.
    """

    values: np.ndarray
    counts: np.ndarray
    censor: tuple[int, int] | None = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int64)
        c = np.asarray(self.counts, dtype=np.int64)
        if v.shape != c.shape or v.ndim != 1:
            raise ValueError("values and counts must be 1-d arrays of equal length")
        if np.any(v < 0):
            raise ValueError("values must be non-negative")
        if np.any(c < 1):
            raise ValueError("explicit counts must be positive")
        order = np.argsort(v)
        v, c = v[order], c[order]
        if np.any(np.diff(v) == 0):
            raise ValueError("values must be distinct")
        cens = self.censor
        if cens is not None:
            cval, ccount = int(cens[0]), int(cens[1])
            if ccount < 0:
                raise ValueError("censored count must be non-negative")
            if v.size and cval <= v[-1]:
                raise ValueError("censor threshold must exceed every explicit value")
            cens = (cval, ccount)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "counts", c)
        object.__setattr__(self, "censor", cens)

    @classmethod
    def from_values(cls, data) -> GroupedCounts:
        arr = np.asarray(data)
        if arr.size and arr.dtype.kind not in "iu":
            if np.any(arr != np.floor(arr)):
                raise ValueError("observations must be integers")
        arr = arr.astype(np.int64)
        v, c = np.unique(arr, return_counts=True)
        return cls(v, c)

    @classmethod
    def from_mapping(cls, cells: Mapping[int, int], censor=None) -> GroupedCounts:
        items = sorted((int(k), int(n)) for k, n in cells.items() if int(n) > 0)
        v = np.array([k for k, _ in items], dtype=np.int64)
        c = np.array([n for _, n in items], dtype=np.int64)
        return cls(v, c, censor)

    @property
    def n_censored(self) -> int:
        return self.censor[1] if self.censor else 0

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.n_censored

    def __len__(self) -> int:
        return self.total

    def as_dict(self) -> dict[int, int]:
        return {int(k): int(n) for k, n in zip(self.values, self.counts)}

    def expand(self) -> np.ndarray:
        """Explicit observations in ascending order (censored mass excluded)."""
        return np.repeat(self.values, self.counts)

    def shifted(self, u: int) -> GroupedCounts:
        """Cells with value >= u, re-expressed as exceedances value - u."""
        keep = self.values >= u
        cens = None
        if self.censor is not None:
            cens = (self.censor[0] - u, self.censor[1])
            if cens[0] < 0:
                raise ValueError("threshold lies above the censoring point")
        return GroupedCounts(self.values[keep] - u, self.counts[keep], cens)

    def __eq__(self, other):
        if not isinstance(other, GroupedCounts):
            return NotImplemented
        return (
            np.array_equal(self.values, other.values)
            and np.array_equal(self.counts, other.counts)
            and self.censor == other.censor
        )

    def __repr__(self):
        head = dict(list(self.as_dict().items())[:6])
        more = "..." if len(self.values) > 6 else ""
        return f"GroupedCounts({head}{more}, censor={self.censor}, total={self.total})"


@dataclass
class FitOptions:
    start: tuple[float, ...] | None = None
    max_iterations: int = 2000
    tolerance: float = 1e-10
    covariate: Sequence[float] | None = None

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")


@dataclass
class FitResult:
    family: Family
    estimates: tuple[float, ...]
    param_names: tuple[str, ...]
    covariance: np.ndarray | None
    nll: float
    aic: float
    bic: float
    n: int
    converged: bool
    covariance_ok: bool = True
    boundary: bool = False
    degenerate: bool = False
    iterations: int = 0
    covariate_range: tuple[float, float] | None = None
    message: str = ""
    hessian: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_params(self) -> int:
        return len(self.estimates)

    @property
    def se(self) -> np.ndarray | None:
        if self.covariance is None:
            return None
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    @property
    def params(self) -> dict[str, float]:
        return dict(zip(self.param_names, self.estimates))

    @property
    def sigma(self) -> float:
        return self.params.get("sigma", self.params.get("sigma0", math.nan))

    @property
    def xi(self) -> float:
        return self.params.get("xi", math.nan)

    @property
    def has_covariate(self) -> bool:
        return self.covariate_range is not None

    def tail_theta(self, covariate_value: float = 1.0):
        """(sigma, xi) at a covariate value on the rescaled [0, 1] axis."""
        if self.has_covariate:
            s0, st, xi = self.estimates
            return (s0 + st * covariate_value, xi)
        return tuple(self.estimates)

    def confint(self, level: float = 0.9, component=0) -> tuple[float, float]:
        return confint(self, level, component)


# ---------------------------------------------------------------------------


def _as_grouped(data) -> GroupedCounts:
    if isinstance(data, GroupedCounts):
        return data
    return GroupedCounts.from_values(data)


def rescale_covariate(c) -> tuple[np.ndarray, tuple[float, float]]:
    """Affine map of the covariate onto [0, 1]."""
    c = np.asarray(c, dtype=float)
    lo, hi = float(c.min()), float(c.max())
    if hi == lo:
        return np.zeros_like(c), (lo, hi)
    return (c - lo) / (hi - lo), (lo, hi)


def _param_names(family: Family, covariate: bool) -> tuple[str, ...]:
    if covariate:
        return ("sigma0", "sigma_t", "xi")
    return family.param_names


def nll(family: Family, params, data, options: FitOptions | None = None) -> float:
    """Negative log-likelihood.

    Returns +inf for infeasible parameters instead of raising.  With a
    covariate, ``params = (sigma0, sigma_t, xi)`` and observation i has scale
    ``sigma0 + sigma_t * covariate[i]``; ``data`` must then be the raw
    observations in the covariate's order.
    """
    covariate = options.covariate if options is not None else None
    if covariate is not None:
        return _nll_covariate(family, params, data, covariate)
    values, counts, censor = _cells(family, data)
    if counts.sum() + (censor[1] if censor else 0) == 0:
        raise ValueError("nll needs at least one observation")
    params = tuple(float(p) for p in params)
    if not family.feasible(params):
        return math.inf
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        total = 0.0
        if values.size:
            total = float(np.dot(counts, family.logpmf(values, params)))
        if censor is not None and censor[1] > 0:
            total += censor[1] * float(family.logsf(float(censor[0]), params))
    if not math.isfinite(total):
        return math.inf
    return -total


def _cells(family: Family, data):
    """(values, counts, censor) for the likelihood.

    Continuous families accept raw non-integer observations, which are used
    as given; everything else is grouped.
    """
    if isinstance(data, GroupedCounts):
        return data.values.astype(float), data.counts.astype(float), data.censor
    arr = np.asarray(data, dtype=float)
    if not family.discrete and np.any(arr != np.floor(arr)):
        if np.any(arr < 0):
            raise ValueError("observations must be non-negative")
        return arr, np.ones_like(arr), None
    g = GroupedCounts.from_values(arr)
    return g.values.astype(float), g.counts.astype(float), None


def _nll_covariate(family, params, data, covariate) -> float:
    if not getattr(family, "tail", False):
        raise ValueError("covariate scale is only available for tail families")
    x = np.asarray(data, dtype=float)
    c = np.asarray(covariate, dtype=float)
    if x.size == 0:
        raise ValueError("nll needs at least one observation")
    if x.shape != c.shape:
        raise ValueError("covariate length must equal the number of observations")
    s0, st, xi = (float(p) for p in params)
    sig = s0 + st * c
    if not (np.all(sig > 0) and xi >= 0 and math.isfinite(xi)):
        return math.inf
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        total = float(np.sum(family.logpmf(x, (sig, xi))))
    return -total if math.isfinite(total) else math.inf


# ---------------------------------------------------------------------------


def _default_start(family: Family, g: GroupedCounts, covariate: bool):
    if getattr(family, "tail", False):
        return (1.0, 0.0, 1.0) if covariate else (1.0, 1.0)
    mean = float(np.dot(g.values, g.counts) / max(g.counts.sum(), 1))
    mean = max(mean, 1e-3)
    if family.name == "geometric":
        return (1.0 / math.log1p(1.0 / mean),)
    if family.name == "poisson":
        return (mean,)
    if family.name == "negbinomial":
        return (1.0, 1.0 / (1.0 + mean))
    raise ValueError(f"no default start for {family.name}")


def _free_transform(family: Family, covariate: bool):
    """(to_free, from_free) maps for the optimizer."""
    if covariate:

        def to_free(theta):
            s0, st, xi = theta
            return np.array([math.log(s0), st, math.log(xi + 1e-12)])

        def from_free(z):
            return (max(math.exp(z[0]), SIGMA_FLOOR), float(z[1]), max(math.exp(z[2]) - 1e-12, 0.0))

        return to_free, from_free
    if isinstance(family, _TailFamily):

        def from_free(z):
            s, xi = family.from_free(z)
            return (max(s, SIGMA_FLOOR), xi)

        return family.to_free, from_free
    return family.to_free, family.from_free


def parameter_bounds(family: Family, covariate: bool):
    if covariate:
        return np.array([SIGMA_FLOOR, -np.inf, 0.0]), np.full(3, np.inf)
    if isinstance(family, _TailFamily):
        return np.array([SIGMA_FLOOR, 0.0]), np.full(2, np.inf)
    lo = np.array(family.lower_bounds(), dtype=float)
    up = np.array(getattr(family, "upper_bounds", lambda: (np.inf,) * family.n_params)(), dtype=float)
    return lo, up


@dataclass
class Information:
    """Observed information (Hessian of the NLL) and its inverse."""

    matrix: np.ndarray
    covariance: np.ndarray | None
    one_sided: tuple[bool, ...]
    singular: bool

    @property
    def boundary(self) -> bool:
        return any(self.one_sided)


def observed_information(family: Family, params, data, options: FitOptions | None = None,
                         objective=None) -> Information:
    """Finite-difference Hessian of the NLL at ``params`` and its inverse.

    ``objective`` replaces the NLL (used to test the differencing scheme).
    Coordinates at a lower bound (xi = 0, sigma at its floor) are differenced
    one-sidedly and flagged.
    """
    covariate = options is not None and options.covariate is not None
    lo, up = parameter_bounds(family, covariate)
    if objective is None:
        def objective(theta):
            return nll(family, theta, data, options)
    x = np.asarray(params, dtype=float)
    if x.size != lo.size:
        lo, up = np.full(x.size, -np.inf), np.full(x.size, np.inf)
    hess = fd_hessian(objective, x, lo, up)
    H = 0.5 * (hess.matrix + hess.matrix.T)
    cov = None
    singular = True
    if np.all(np.isfinite(H)):
        try:
            L = np.linalg.cholesky(H)
            Linv = np.linalg.inv(L)
            cov = Linv.T @ Linv
            cov = 0.5 * (cov + cov.T)
            singular = False
        except np.linalg.LinAlgError:
            pass
    return Information(H, cov, hess.one_sided, singular)


def fit(family: Family, data, options: FitOptions | None = None, *,
        with_covariance: bool = True) -> FitResult:
    """Maximum-likelihood fit; never raises on non-convergence.

    ``with_covariance=False`` skips the Hessian (bootstrap refits).
    """
    options = options or FitOptions()
    covariate = options.covariate is not None
    if covariate:
        x = np.asarray(data, dtype=float)
        if x.size == 0:
            raise ValueError("cannot fit an empty sample")
        if np.asarray(options.covariate).shape != x.shape:
            raise ValueError("covariate length must equal the number of observations")
        cov_scaled, crange = rescale_covariate(options.covariate)
        work_opts = FitOptions(options.start, options.max_iterations, options.tolerance, cov_scaled)
        g = GroupedCounts.from_values(x)
        work_data = x
        n_distinct = g.values.size
    else:
        values, counts, censor = _cells(family, data)
        if counts.sum() + (censor[1] if censor else 0) == 0:
            raise ValueError("cannot fit an empty sample")
        crange = None
        work_opts = None
        if isinstance(data, GroupedCounts):
            g = work_data = data
        elif np.array_equal(values, np.floor(values)):
            g = work_data = GroupedCounts(values.astype(np.int64), counts.astype(np.int64))
        else:
            # continuous observations: keep them raw, group only for bookkeeping
            work_data = values
            g = GroupedCounts.from_values(np.floor(values))
        n_distinct = np.unique(values).size + (1 if censor and censor[1] else 0)

    names = _param_names(family, covariate)
    start = tuple(options.start) if options.start is not None else _default_start(family, g, covariate)
    if covariate and len(start) == 2:
        start = (start[0], 0.0, start[1])
    if len(start) != len(names):
        raise ValueError(f"start must have {len(names)} entries for {names}")

    degenerate = n_distinct < 2

    to_free, from_free = _free_transform(family, covariate)

    def objective(z):
        return nll(family, from_free(z), work_data, work_opts)

    res = nelder_mead(objective, to_free(start), tol=options.tolerance,
                      max_iter=options.max_iterations)
    theta = from_free(res.x)
    value = nll(family, theta, work_data, work_opts)
    converged = res.converged and math.isfinite(value)

    if with_covariance:
        info = observed_information(family, theta, work_data, work_opts)
    else:
        info = Information(np.full((len(theta),) * 2, np.nan), None, (False,) * len(theta), True)
    k = len(theta)
    n = g.total
    msgs = []
    if not res.converged:
        msgs.append("iteration limit reached")
    if not with_covariance:
        msgs.append("covariance not computed")
    elif info.singular:
        msgs.append("observed information not positive definite")
    if info.boundary:
        msgs.append("estimate on the parameter boundary")
    if degenerate:
        msgs.append("all observations equal")
    return FitResult(
        family=family,
        estimates=tuple(float(t) for t in theta),
        param_names=names,
        covariance=info.covariance,
        nll=value,
        aic=2 * k + 2 * value,
        bic=k * math.log(n) + 2 * value,
        n=n,
        converged=converged and not degenerate,
        covariance_ok=not info.singular,
        boundary=info.boundary,
        degenerate=degenerate,
        iterations=res.iterations,
        covariate_range=crange,
        message="; ".join(msgs),
        hessian=info.matrix,
    )


def _component_index(result: FitResult, component) -> int:
    if isinstance(component, str):
        return result.param_names.index(component)
    return int(component)


def confint(result: FitResult, level: float = 0.9, component=0) -> tuple[float, float]:
    """Wald interval estimate +- z * se on the natural scale."""
    if result.covariance is None:
        raise ValueError("covariance unavailable: observed information was singular")
    if not 0 <= level < 1:
        raise ValueError("level must lie in [0, 1)")
    j = _component_index(result, component)
    est = result.estimates[j]
    se = float(result.se[j])
    return wald_interval(est, se, level)


def wald_interval(estimate: float, se: float, level: float) -> tuple[float, float]:
    if level == 0 or se == 0:
        return (estimate, estimate)
    z = normal_quantile(0.5 * (1.0 + level))
    return (estimate - z * se, estimate + z * se)


def is_gpd(family: Family) -> bool:
    return isinstance(family, GPD)
