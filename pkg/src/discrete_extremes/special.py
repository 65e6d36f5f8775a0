"""Hurwitz zeta function and the normal quantile."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtri

# Number of leading terms summed directly before the Euler-Maclaurin tail.
_MIN_TERMS = 50


def _n_terms(q_min: float) -> int:
    return max(_MIN_TERMS, math.ceil(10.0 - q_min))


def log_hurwitz_zeta_scaled(s: float, q):
    """Return ``log(q**s * H(s, q))`` for scalar ``s > 1`` and array ``q > 0``.

    Scaling by ``q**s`` keeps the computation finite when ``s`` is huge or
    ``q`` is large (the generalized Zipf pmf with a small shape parameter).
    """
    s = float(s)
    q = np.asarray(q, dtype=float)
    if not s > 1.0:
        raise ValueError(f"hurwitz_zeta requires s > 1, got s={s}")
    if np.any(~(q > 0.0)):
        raise ValueError("hurwitz_zeta requires q > 0")
    n = _n_terms(float(q.min()) if q.size else 1.0)
    i = np.arange(n, dtype=float).reshape((n,) + (1,) * q.ndim)
    head = np.exp(-s * np.log1p(i / q)).sum(axis=0)

    # Euler-Maclaurin remainder for sum_{i>=n} (q+i)^-s, scaled by q^s.
    a = q + n
    lead = np.exp(-s * np.log1p(n / q))
    s3 = s * (s + 1) * (s + 2)
    corr = (
        a / (s - 1.0)
        + 0.5
        + s / (12.0 * a)
        - s3 / (720.0 * a**3)
        + s3 * (s + 3) * (s + 4) / (30240.0 * a**5)
    )
    return np.log(head + lead * corr)


def log_hurwitz_zeta(s: float, q):
    q_arr = np.asarray(q, dtype=float)
    out = log_hurwitz_zeta_scaled(s, q_arr) - float(s) * np.log(q_arr)
    return out if np.ndim(q) else float(out)


def hurwitz_zeta(s: float, q):
    """H(s, q) = sum_{i>=0} (q + i)^-s for s > 1, q > 0."""
    out = np.exp(log_hurwitz_zeta(s, q))
    return out if np.ndim(q) else float(out)


def normal_quantile(p):
    """Standard normal quantile."""
    p = np.asarray(p, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("normal_quantile requires 0 < p < 1")
    out = ndtri(p)
    return out if out.ndim else float(out)
