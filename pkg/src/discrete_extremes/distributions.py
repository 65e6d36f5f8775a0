"""Distribution families for discrete tail modeling.

Everything is evaluated in log-space and vectorized over the value argument;
the scale may also be an array (covariate-dependent scale).  The shape xi is
always a scalar and must be non-negative.

Tail families
    ``GPD(delta)``  continuous generalized Pareto, density evaluated at k+delta
    ``DGPD``        discrete GPD, p(k) = S(k) - S(k+1) with S the GPD survival
    ``GZD``         generalized Zipf, p(k) proportional to (1 + xi k / sigma)^(-1/xi-1)

Baselines: ``Geometric``, ``Poisson``, ``NegBinomial``; plus ``InverseGamma``
for simulation only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy import special as sc

from .rng import as_generator
from .special import log_hurwitz_zeta_scaled

# Below this |xi| the exponential limit is used.
XI_ZERO = 1e-8


@dataclass(frozen=True)
class TailParams:
    sigma: float
    xi: float

    def __post_init__(self):
        s, x = float(self.sigma), float(self.xi)
        if not (math.isfinite(s) and math.isfinite(x)):
            raise ValueError(f"non-finite tail parameters sigma={s}, xi={x}")
        if s <= 0:
            raise ValueError(f"sigma must be positive, got {s}")
        if x < 0:
            raise ValueError(f"xi must be non-negative, got {x}")
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "xi", x)

    def as_tuple(self) -> tuple[float, float]:
        return (self.sigma, self.xi)


def _params(p) -> TailParams:
    if isinstance(p, TailParams):
        return p
    return TailParams(*p)


def _check_nonneg(x, what="x"):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise ValueError(f"{what} must be non-negative")
    return x


def _check_int(k):
    k = np.asarray(k)
    if k.dtype.kind not in "iu":
        kf = np.asarray(k, dtype=float)
        if np.any(kf != np.floor(kf)):
            raise ValueError("k must be integer valued")
    k = np.asarray(k, dtype=float)
    if np.any(k < 0):
        raise ValueError("k must be non-negative")
    return k


def _out(a, like):
    if np.ndim(like):
        return a
    return np.asarray(a).reshape(-1)[0].item()


# ---------------------------------------------------------------------------
# raw log-space kernels (no validation; sigma may be an array)


def gpd_logsf_raw(x, sigma, xi):
    if xi < XI_ZERO:
        return -x / sigma
    return -np.log1p(xi * x / sigma) / xi


def gpd_logpdf_raw(x, sigma, xi):
    if xi < XI_ZERO:
        return -np.log(sigma) - x / sigma
    return -np.log(sigma) - (1.0 / xi + 1.0) * np.log1p(xi * x / sigma)


def _log_diff(la, lb):
    """log(exp(la) - exp(lb)) for la >= lb."""
    return la + np.log(-np.expm1(lb - la))


def dgpd_logpmf_raw(k, sigma, xi):
    if xi < XI_ZERO:
        # geometric: log(1 - e^{-1/sigma}) - k/sigma
        return np.log(-np.expm1(-1.0 / sigma)) - k / sigma
    return _log_diff(gpd_logsf_raw(k, sigma, xi), gpd_logsf_raw(k + 1.0, sigma, xi))


def gzd_logpmf_raw(k, sigma, xi):
    if xi < XI_ZERO:
        return np.log(-np.expm1(-1.0 / sigma)) - k / sigma
    s = 1.0 + 1.0 / xi
    q = sigma / xi
    return -s * np.log1p(k / q) - log_hurwitz_zeta_scaled(s, q)


def gzd_logsf_raw(k, sigma, xi):
    """log P(X >= k) = log H(s, q+k) - log H(s, q)."""
    if xi < XI_ZERO:
        return -k / sigma
    s = 1.0 + 1.0 / xi
    q = sigma / xi
    k, q = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(q, dtype=float))
    out = np.zeros(k.shape)
    pos = k > 0
    if np.any(pos):
        qk = q[pos] + k[pos]
        out[pos] = (
            -s * np.log1p(k[pos] / q[pos])
            + log_hurwitz_zeta_scaled(s, qk)
            - log_hurwitz_zeta_scaled(s, q[pos])
        )
    return out


# ---------------------------------------------------------------------------
# GPD


def gpd_survival(x, p):
    """(1 + xi x / sigma)^(-1/xi), or exp(-x/sigma) when xi = 0."""
    p = _params(p)
    xa = _check_nonneg(x)
    return _out(np.exp(gpd_logsf_raw(xa, p.sigma, p.xi)), x)


def gpd_density(x, p, delta: float = 0.0):
    """GPD density at the shifted point x + delta."""
    p = _params(p)
    if not 0.0 <= delta < 1.0:
        raise ValueError(f"delta must lie in [0, 1), got {delta}")
    xa = _check_nonneg(x)
    return _out(np.exp(gpd_logpdf_raw(xa + delta, p.sigma, p.xi)), x)


def gpd_quantile(u, p):
    p = _params(p)
    ua = np.asarray(u, dtype=float)
    if np.any(~((ua > 0) & (ua < 1))):
        raise ValueError("u must lie in (0, 1)")
    return _out(_gpd_quantile_raw(ua, p.sigma, p.xi), u)


def _gpd_quantile_raw(u, sigma, xi):
    # -log(1-u) computed as -log1p(-u)
    t = -np.log1p(-u)
    if xi < XI_ZERO:
        return sigma * t
    return sigma * np.expm1(xi * t) / xi


# ---------------------------------------------------------------------------
# D-GPD


def dgpd_pmf(k, p):
    p = _params(p)
    ka = _check_int(k)
    return _out(np.exp(dgpd_logpmf_raw(ka, p.sigma, p.xi)), k)


def dgpd_logpmf(k, p):
    p = _params(p)
    return _out(dgpd_logpmf_raw(_check_int(k), p.sigma, p.xi), k)


def dgpd_survival(k, p):
    """P(X >= k); identical to the GPD survival at integer k."""
    p = _params(p)
    ka = _check_int(k)
    return _out(np.exp(gpd_logsf_raw(ka, p.sigma, p.xi)), k)


def dgpd_cdf(k, p):
    p = _params(p)
    ka = _check_int(k)
    return _out(-np.expm1(gpd_logsf_raw(ka + 1.0, p.sigma, p.xi)), k)


def dgpd_quantile(u, p):
    """Smallest integer k with cdf(k) >= u."""
    p = _params(p)
    ua = _check_unit(u)
    k = np.maximum(np.ceil(_gpd_quantile_raw(ua, p.sigma, p.xi)) - 1.0, 0.0)
    k = _fix_quantile(k, ua, lambda kk: gpd_logsf_raw(kk, p.sigma, p.xi))
    return _out(k.astype(np.int64), u)


def _check_unit(u):
    ua = np.asarray(u, dtype=float)
    if np.any(~((ua > 0) & (ua < 1))):
        raise ValueError("u must lie in (0, 1)")
    return ua


def _fix_quantile(k, u, logsf):
    """Correct an off-by-one candidate so that k is the minimal integer with
    P(X >= k+1) <= 1-u."""
    target = np.log1p(-u)
    for _ in range(4):
        up = logsf(k + 1.0) > target
        k = np.where(up, k + 1.0, k)
        down = (k > 0) & (logsf(k) <= target)
        k = np.where(down, k - 1.0, k)
        if not (np.any(up) or np.any(down)):
            break
    return k


# ---------------------------------------------------------------------------
# GZD


def gzd_pmf(k, p):
    p = _params(p)
    ka = _check_int(k)
    return _out(np.exp(gzd_logpmf_raw(ka, p.sigma, p.xi)), k)


def gzd_logpmf(k, p):
    p = _params(p)
    return _out(gzd_logpmf_raw(_check_int(k), p.sigma, p.xi), k)


def gzd_survival(k, p):
    p = _params(p)
    ka = _check_int(k)
    return _out(np.exp(gzd_logsf_raw(ka, p.sigma, p.xi)), k)


def gzd_cdf(k, p):
    p = _params(p)
    ka = _check_int(k)
    return _out(-np.expm1(gzd_logsf_raw(ka + 1.0, p.sigma, p.xi)), k)


def gzd_quantile(u, p):
    """Smallest integer k with cdf(k) >= u, by doubling then bisection."""
    p = _params(p)
    ua = _check_unit(u)
    return _out(_bracket_quantile(ua, lambda kk: gzd_logsf_raw(kk, p.sigma, p.xi)), u)


def _bracket_quantile(u, logsf):
    """Vectorized search for min k with logsf(k+1) <= log(1-u)."""
    u = np.atleast_1d(u)
    target = np.log1p(-u)
    ok = lambda kk: logsf(kk + 1.0) <= target  # noqa: E731
    hi = np.zeros_like(u)
    done = ok(hi)
    lo = np.full_like(u, -1.0)  # ok(lo) is False by convention
    step = 1.0
    while not np.all(done):
        cand = np.where(done, hi, step)
        good = ok(cand)
        newly = good & ~done
        lo = np.where(~good & ~done, cand, lo)
        hi = np.where(newly, cand, hi)
        done = done | good
        step *= 2.0
        if step > 2.0**62:
            raise OverflowError("quantile search did not terminate")
    # invariant: ok(hi) True, ok(lo) False (or lo == -1)
    while True:
        gap = hi - lo > 1
        if not np.any(gap):
            break
        mid = np.floor((lo + hi) / 2.0)
        good = ok(mid)
        hi = np.where(gap & good, mid, hi)
        lo = np.where(gap & ~good, mid, lo)
    return hi.astype(np.int64)


# ---------------------------------------------------------------------------
# baselines


def geometric_logpmf(k, p):
    return np.log(p) + k * np.log1p(-p)


def poisson_logpmf(k, rate):
    return k * np.log(rate) - rate - sc.gammaln(k + 1.0)


def negbinomial_logpmf(k, r, p):
    """Failures before the r-th success, success probability p."""
    return (
        sc.gammaln(k + r) - sc.gammaln(r) - sc.gammaln(k + 1.0) + r * np.log(p) + k * np.log1p(-p)
    )


def baseline_pmf(family: str, k, **params):
    """pmf of a geometric (p), Poisson (rate) or negative binomial (r, p) law."""
    ka = _check_int(k)
    name = family.lower().replace("_", "").replace("-", "")
    if name == "geometric":
        pr = params["p"]
        if not 0 < pr < 1:
            raise ValueError("geometric p must lie in (0, 1)")
        lp = geometric_logpmf(ka, pr)
    elif name == "poisson":
        rate = params.get("rate", params.get("lam"))
        if rate is None or not rate > 0:
            raise ValueError("poisson rate must be positive")
        lp = poisson_logpmf(ka, rate)
    elif name == "negbinomial":
        r, pr = params["r"], params["p"]
        if not (r > 0 and 0 < pr < 1):
            raise ValueError("negative binomial needs r > 0 and p in (0, 1)")
        lp = negbinomial_logpmf(ka, r, pr)
    else:
        raise ValueError(f"unknown baseline family {family!r}")
    return _out(np.exp(lp), k)


# ---------------------------------------------------------------------------
# family objects used by the fitting code


@dataclass(frozen=True)
class Family:
    """Base class.  Parameters travel as plain tuples in natural units."""

    name: ClassVar[str] = ""
    param_names: ClassVar[tuple[str, ...]] = ()
    discrete: ClassVar[bool] = True
    tail: ClassVar[bool] = False

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    @property
    def label(self) -> str:
        return self.name

    # subclasses implement logpmf, logsf, check, to_free, from_free, lower
    def pmf(self, k, theta):
        return np.exp(self.logpmf(np.asarray(k, dtype=float), theta))

    def sf(self, k, theta):
        return np.exp(self.logsf(np.asarray(k, dtype=float), theta))

    def cdf(self, k, theta):
        """P(X <= k) at integer k (discretized law for continuous families)."""
        return -np.expm1(self.logsf(np.asarray(k, dtype=float) + 1.0, theta))

    def quantile(self, u, theta):
        theta = self.check(theta)
        return _out(_bracket_quantile(_check_unit(u), lambda kk: self.logsf(kk, theta)), u)

    def sample(self, theta, n: int, rng):
        g = as_generator(rng)
        if n == 0:
            return np.zeros(0, dtype=np.int64)
        return self.quantile(_open_uniform(g, n), theta)

    def lower_bounds(self) -> tuple[float, ...]:
        return tuple(0.0 for _ in self.param_names)

    def feasible(self, theta) -> bool:
        try:
            self.check(theta)
        except (ValueError, TypeError):
            return False
        return True


def _open_uniform(g: np.random.Generator, n: int):
    u = g.random(n)
    # random() is on [0, 1); 0 is mapped to the smallest positive double
    return np.where(u > 0, u, np.nextafter(0.0, 1.0))


class _TailFamily(Family):
    param_names = ("sigma", "xi")
    tail = True

    def check(self, theta):
        sigma, xi = theta
        sigma = np.asarray(sigma, dtype=float)
        xi = float(xi)
        if np.any(~(sigma > 0)) or not np.all(np.isfinite(sigma)):
            raise ValueError("sigma must be positive")
        if not (xi >= 0 and math.isfinite(xi)):
            raise ValueError("xi must be non-negative")
        return (sigma if sigma.ndim else float(sigma), xi)

    def to_free(self, theta):
        sigma, xi = theta
        return np.array([math.log(sigma), math.log(xi + 1e-12)])

    def from_free(self, z):
        return (math.exp(z[0]), max(math.exp(z[1]) - 1e-12, 0.0))

    def sample(self, theta, n: int, rng):
        sigma, xi = self.check(theta)
        g = as_generator(rng)
        if n == 0:
            return np.zeros(0, dtype=np.int64)
        return self._sample(sigma, xi, _open_uniform(g, n))


@dataclass(frozen=True)
class GPD(_TailFamily):
    delta: float = 0.0
    name: ClassVar[str] = "gpd"
    discrete: ClassVar[bool] = False

    def __post_init__(self):
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")

    @property
    def label(self) -> str:
        return "gpd" if self.delta == 0 else f"gpd(delta={self.delta:g})"

    def logpmf(self, k, theta):
        sigma, xi = theta
        return gpd_logpdf_raw(np.asarray(k, dtype=float) + self.delta, sigma, xi)

    def logsf(self, k, theta):
        sigma, xi = theta
        return gpd_logsf_raw(np.asarray(k, dtype=float), sigma, xi)

    def quantile(self, u, theta):
        sigma, xi = self.check(theta)
        return _gpd_quantile_raw(_check_unit(u), sigma, xi)

    def _sample(self, sigma, xi, u):
        return _gpd_quantile_raw(u, sigma, xi)


@dataclass(frozen=True)
class DGPD(_TailFamily):
    name: ClassVar[str] = "dgpd"

    def logpmf(self, k, theta):
        sigma, xi = theta
        return dgpd_logpmf_raw(np.asarray(k, dtype=float), sigma, xi)

    def logsf(self, k, theta):
        sigma, xi = theta
        return gpd_logsf_raw(np.asarray(k, dtype=float), sigma, xi)

    def quantile(self, u, theta):
        return dgpd_quantile(u, TailParams(*self.check(theta)))

    def _sample(self, sigma, xi, u):
        # X = floor(Y) with Y a GPD draw by inversion
        return np.floor(_gpd_quantile_raw(u, sigma, xi)).astype(np.int64)


@dataclass(frozen=True)
class GZD(_TailFamily):
    name: ClassVar[str] = "gzd"

    def logpmf(self, k, theta):
        sigma, xi = theta
        return gzd_logpmf_raw(np.asarray(k, dtype=float), sigma, xi)

    def logsf(self, k, theta):
        sigma, xi = theta
        return gzd_logsf_raw(np.asarray(k, dtype=float), sigma, xi)

    def _sample(self, sigma, xi, u):
        return _bracket_quantile(u, lambda kk: gzd_logsf_raw(kk, sigma, xi))


@dataclass(frozen=True)
class Geometric(Family):
    """Geometric law parameterized by the D-GPD scale: p = 1 - exp(-1/sigma)."""

    name: ClassVar[str] = "geometric"
    param_names: ClassVar[tuple[str, ...]] = ("sigma",)

    def check(self, theta):
        (sigma,) = theta
        if not (sigma > 0 and math.isfinite(sigma)):
            raise ValueError("sigma must be positive")
        return (float(sigma),)

    def logpmf(self, k, theta):
        (sigma,) = theta
        return dgpd_logpmf_raw(np.asarray(k, dtype=float), sigma, 0.0)

    def logsf(self, k, theta):
        (sigma,) = theta
        return -np.asarray(k, dtype=float) / sigma

    def to_free(self, theta):
        return np.array([math.log(theta[0])])

    def from_free(self, z):
        return (math.exp(z[0]),)


@dataclass(frozen=True)
class Poisson(Family):
    name: ClassVar[str] = "poisson"
    param_names: ClassVar[tuple[str, ...]] = ("rate",)

    def check(self, theta):
        (rate,) = theta
        if not (rate > 0 and math.isfinite(rate)):
            raise ValueError("rate must be positive")
        return (float(rate),)

    def logpmf(self, k, theta):
        return poisson_logpmf(np.asarray(k, dtype=float), theta[0])

    def logsf(self, k, theta):
        k = np.asarray(k, dtype=float)
        # P(X >= k) is the regularized lower incomplete gamma P(k, rate)
        with np.errstate(divide="ignore"):
            return np.where(k > 0, np.log(sc.gammainc(np.maximum(k, 1.0), theta[0])), 0.0)

    def to_free(self, theta):
        return np.array([math.log(theta[0])])

    def from_free(self, z):
        return (math.exp(z[0]),)

    def sample(self, theta, n, rng):
        return as_generator(rng).poisson(self.check(theta)[0], n).astype(np.int64)


@dataclass(frozen=True)
class NegBinomial(Family):
    name: ClassVar[str] = "negbinomial"
    param_names: ClassVar[tuple[str, ...]] = ("r", "p")

    def check(self, theta):
        r, p = theta
        if not (r > 0 and math.isfinite(r) and 0 < p < 1):
            raise ValueError("negative binomial needs r > 0 and p in (0, 1)")
        return (float(r), float(p))

    def logpmf(self, k, theta):
        r, p = theta
        return negbinomial_logpmf(np.asarray(k, dtype=float), r, p)

    def logsf(self, k, theta):
        r, p = theta
        k = np.asarray(k, dtype=float)
        # P(X >= k) = I_{1-p}(k, r)
        with np.errstate(divide="ignore"):
            return np.where(k > 0, np.log(sc.betainc(np.maximum(k, 1.0), r, 1.0 - p)), 0.0)

    def to_free(self, theta):
        r, p = theta
        return np.array([math.log(r), math.log(p / (1.0 - p))])

    def from_free(self, z):
        return (math.exp(z[0]), float(sc.expit(z[1])))

    def lower_bounds(self):
        return (0.0, 0.0)

    def upper_bounds(self):
        return (math.inf, 1.0)

    def sample(self, theta, n, rng):
        r, p = self.check(theta)
        return as_generator(rng).negative_binomial(r, p, n).astype(np.int64)


@dataclass(frozen=True)
class InverseGamma:
    """Continuous inverse-gamma law, used only to generate data."""

    alpha: float = 2.0
    beta: float = 1.0
    name: ClassVar[str] = "inversegamma"

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError("inverse gamma needs alpha, beta > 0")

    def sf(self, y):
        """P(Y > y) = P(G < beta/y) for G ~ Gamma(alpha)."""
        y = np.asarray(y, dtype=float)
        return sc.gammainc(self.alpha, self.beta / y)

    def isf(self, p):
        """y with P(Y > y) = p."""
        return self.beta / sc.gammaincinv(self.alpha, p)

    def sample(self, n: int, rng):
        g = as_generator(rng)
        return self.beta / g.standard_gamma(self.alpha, n)


FAMILIES = {
    "gpd": GPD,
    "dgpd": DGPD,
    "gzd": GZD,
    "geometric": Geometric,
    "poisson": Poisson,
    "negbinomial": NegBinomial,
}


def family_from_name(name: str, delta: float = 0.0) -> Family:
    key = name.lower().replace("-", "").replace("_", "")
    if key not in FAMILIES:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}")
    return GPD(delta) if key == "gpd" else FAMILIES[key]()


def sample(family, params, n: int, rng):
    """Draw n values from a family.

    ``family`` is a Family instance or an InverseGamma; ``params`` is the
    parameter tuple (ignored for InverseGamma).
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if isinstance(family, InverseGamma):
        return family.sample(n, rng)
    if isinstance(params, TailParams):
        params = params.as_tuple()
    return family.sample(family.check(tuple(params)), n, rng)


# ---------------------------------------------------------------------------


def invariance_check(sigma, xi, lam, h, u, k_max: int = 50) -> float:
    """Largest |P(X-u=k | X>=u) - p_DGPD(k; lam*sigma + xi*(u+h-1), xi)| over
    k <= k_max, where X = floor(lam*Y + 1 - h) and Y ~ GPD(sigma, xi)."""
    TailParams(sigma, xi)
    if not lam > 0:
        raise ValueError("lam must be positive")
    if not 0 < h <= 1:
        raise ValueError("h must lie in (0, 1]")
    if u < 1 - h:
        raise ValueError("u must be at least 1 - h")
    j = np.arange(k_max + 2, dtype=float) + u
    # P(X >= j) = P(Y >= (j - 1 + h) / lam)
    logs = gpd_logsf_raw((j - 1.0 + h) / lam, sigma, xi)
    exact = np.exp(logs[:-1] - logs[0]) - np.exp(logs[1:] - logs[0])
    scale = lam * sigma + xi * (u + h - 1.0)
    k = np.arange(k_max + 1, dtype=float)
    model = np.exp(dgpd_logpmf_raw(k, scale, xi))
    return float(np.max(np.abs(exact - model)))
