"""Reference computations that share no code with the package.

Each oracle uses a different route to the answer: brute-force summation,
arbitrary precision, symbolic differentiation or exhaustive grid search.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np
import scipy.special as sc
import sympy

BRUTE_TERMS = 10**7


def hurwitz_bruteforce(s: float, q: float, terms: int = BRUTE_TERMS):
    """(estimate, lower, upper) for sum_{i>=0} (q+i)^-s.

    The partial sum over ``terms`` terms is exact up to rounding; the tail
    sum_{i>=N} f(i) of the decreasing f is bracketed by
    int_N^inf f <= tail <= f(N) + int_N^inf f, and the estimate takes the
    midpoint of that bracket.
    """
    i = np.arange(terms, dtype=float)
    head = math.fsum(np.exp(-s * np.log(q + i)))
    a = q + terms
    integral = a ** (1.0 - s) / (s - 1.0)
    first = a ** (-s)
    return head + integral + 0.5 * first, head + integral, head + integral + first


def hurwitz_mp(s: float, q: float) -> float:
    with mpmath.workdps(40):
        return float(mpmath.zeta(s, q))


def log_hurwitz_direct_mp(s: float, q: float, span: int = 20) -> float:
    """log H(s, q) by a 40-digit direct sum over span*q terms plus an integral
    tail.  Only accurate when the terms decay fast, i.e. s large relative to q.
    mpmath's own zeta loses digits in that regime."""
    with mpmath.workdps(40):
        qs = mpmath.mpf(q)
        m = int(span * q)
        tot = mpmath.fsum((1 + mpmath.mpf(i) / qs) ** (-s) for i in range(m))
        a = 1 + mpmath.mpf(m) / qs
        tot += qs / (s - 1) * a ** (1 - s) + a ** (-s) / 2
        return float(-s * mpmath.log(qs) + mpmath.log(tot))


def dgpd_pmf_direct(k, sigma, xi):
    """Difference of GPD survival values evaluated literally."""
    k = np.asarray(k, dtype=float)
    if xi == 0:
        return np.exp(-k / sigma) - np.exp(-(k + 1) / sigma)
    return (1 + xi * k / sigma) ** (-1 / xi) - (1 + xi * (k + 1) / sigma) ** (-1 / xi)


def gzd_pmf_mp(k: int, sigma: float, xi: float) -> float:
    with mpmath.workdps(40):
        if xi == 0:
            a = mpmath.mpf(1) / sigma
            return float((1 - mpmath.exp(-a)) * mpmath.exp(-a * k))
        s = 1 + mpmath.mpf(1) / xi
        q = mpmath.mpf(sigma) / xi
        return float((k + q) ** (-s) / mpmath.zeta(s, q))


def ig_truth(alpha=2.0, beta=1.0, level=1e-4):
    """Root of P(Y > q) = level for Y ~ IG(alpha, beta) by mpmath bisection on
    the closed-form survival (valid for alpha = 2)."""
    assert alpha == 2.0

    def sf(y):
        return 1 - mpmath.exp(-beta / y) * (1 + beta / y)

    with mpmath.workdps(30):
        q = mpmath.findroot(lambda y: sf(y) - level, (10, 1000), solver="bisect")
        m = int(mpmath.floor(q))
        return float(q), m, float(sf(m))


def geometric_information(n0: int, n1: int, sigma: float) -> float:
    """d^2/dsigma^2 of the geometric NLL for data {0: n0, 1: n1}."""
    s = sympy.symbols("s", positive=True)
    p = 1 - sympy.exp(-1 / s)
    nll = -(n0 * sympy.log(p) + n1 * (sympy.log(p) - 1 / s))
    return float(sympy.diff(nll, s, 2).subs(s, sigma).evalf(30))


# ---------------------------------------------------------------------------
# exhaustive grid search for two-parameter tail fits

SIGMA_GRID = np.round(np.arange(0.05, 20.0 + 1e-9, 0.01), 2)
XI_GRID = np.round(np.arange(0.0, 5.0 + 1e-9, 0.01), 2)


def _grid_logpmf(family: str, k: float, S, X, log_norm=None):
    pos = X > 0
    Xp = np.where(pos, X, 1.0)
    if family == "dgpd":
        a = np.where(pos, -np.log1p(Xp * k / S) / Xp, -k / S)
        b = np.where(pos, -np.log1p(Xp * (k + 1) / S) / Xp, -(k + 1) / S)
        return a + np.log(-np.expm1(b - a))
    if family == "gzd":
        s = 1 + 1 / Xp
        q = S / Xp
        if log_norm is None:
            log_norm = np.log(sc.zeta(s, q))
        zipf = -s * np.log(k + q) - log_norm
        geo = np.log(-np.expm1(-1 / S)) - k / S
        return np.where(pos, zipf, geo)
    raise ValueError(family)


def _log_zeta_grid(s, q, terms: int = 4000):
    """log H(s, q) on a grid.  scipy's zeta underflows once q^-s does, so those
    cells use log q^-s plus a direct sum of (1 + i/q)^-s with a midpoint
    integral tail."""
    out = np.empty_like(s)
    small = s * np.log(q) > 600
    with np.errstate(divide="ignore"):
        out[~small] = np.log(sc.zeta(s[~small], q[~small]))
    ss, qq = s[small][:, None], q[small][:, None]
    i = np.arange(terms, dtype=float)[None, :]
    head = np.sum((1 + i / qq) ** (-ss), axis=1)
    a = 1 + terms / qq[:, 0]
    tail = qq[:, 0] / (ss[:, 0] - 1) * a ** (1 - ss[:, 0]) + 0.5 * a ** (-ss[:, 0])
    out[small] = -ss[:, 0] * np.log(qq[:, 0]) + np.log(head + tail)
    return out


def grid_search(family: str, data: dict[int, int]):
    """Minimum NLL over the (sigma, xi) grid, plus the NLL step size: the
    largest change between the minimizing cell and its neighbours."""
    S, X = np.meshgrid(SIGMA_GRID, XI_GRID, indexing="ij")
    total = np.zeros_like(S)
    log_norm = None
    if family == "gzd":
        Xp = np.where(X > 0, X, 1.0)
        log_norm = _log_zeta_grid(1 + 1 / Xp, S / Xp)
    for k, c in data.items():
        total -= c * _grid_logpmf(family, float(k), S, X, log_norm)
    i, j = np.unravel_index(np.argmin(total), total.shape)
    best = total[i, j]
    nb = total[max(i - 1, 0): i + 2, max(j - 1, 0): j + 2]
    return float(best), float(np.max(nb) - best), (float(S[i, j]), float(X[i, j]))


# small fixed samples for the grid-search comparison (n <= 20)
ORACLE_DATASETS = [
    {0: 2, 1: 1, 2: 1},
    {0: 5, 1: 3, 2: 2, 4: 1, 7: 1},
    {0: 1, 1: 1, 3: 1, 10: 1},
    {0: 8, 1: 4, 2: 2, 3: 1},
    {1: 2, 2: 3, 3: 2, 5: 1},
    {0: 3, 2: 2, 5: 2, 9: 1, 20: 1},
    {0: 10, 1: 5, 2: 2, 6: 1, 15: 1, 40: 1},
    {0: 4, 1: 4, 2: 4, 3: 4},
    {0: 6, 3: 1, 12: 1},
    {2: 1, 4: 2, 6: 3, 8: 2, 11: 1},
]
