"""Nelder-Mead simplex minimizer and finite-difference Hessians."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int
    converged: bool


def nelder_mead(f, x0, step=0.5, tol=1e-10, max_iter=2000, restarts=1) -> SimplexResult:
    """Minimize ``f`` from ``x0``.

    Converges when the spread of function values over the simplex is below
    ``tol * (|f_best| + tol)``.  Infinite values are allowed and simply
    rejected.  After convergence the search is restarted ``restarts`` times
    from the best vertex, which guards against a collapsed simplex.
    """
    x = np.asarray(x0, dtype=float)
    total_it = total_ev = 0
    res = None
    for attempt in range(restarts + 1):
        res = _nm_run(f, x, step, tol, max_iter - total_it)
        total_it += res.iterations
        total_ev += res.evaluations
        if not res.converged or total_it >= max_iter:
            break
        if attempt > 0 and np.allclose(res.x, x, rtol=0, atol=1e-9):
            break
        x = res.x
    res.iterations, res.evaluations = total_it, total_ev
    return res


def _nm_run(f, x0, step, tol, max_iter) -> SimplexResult:
    n = x0.size
    sim = np.empty((n + 1, n))
    sim[0] = x0
    for i in range(n):
        v = x0.copy()
        v[i] += step
        sim[i + 1] = v
    fs = np.array([_safe(f, v) for v in sim])
    evals = n + 1
    it = 0
    converged = False
    while it < max_iter:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        best, worst = fs[0], fs[-1]
        if math.isfinite(worst) and worst - best <= tol * (abs(best) + tol):
            converged = True
            break
        it += 1
        centroid = sim[:-1].mean(axis=0)
        xr = centroid + REFLECT * (centroid - sim[-1])
        fr = _safe(f, xr)
        evals += 1
        if fr < fs[0]:
            xe = centroid + EXPAND * (xr - centroid)
            fe = _safe(f, xe)
            evals += 1
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
            continue
        if fr < fs[-1]:
            xc = centroid + CONTRACT * (xr - centroid)
        else:
            xc = centroid + CONTRACT * (sim[-1] - centroid)
        fc = _safe(f, xc)
        evals += 1
        if fc < min(fr, fs[-1]):
            sim[-1], fs[-1] = xc, fc
            continue
        for i in range(1, n + 1):
            sim[i] = sim[0] + SHRINK * (sim[i] - sim[0])
            fs[i] = _safe(f, sim[i])
        evals += n
    order = np.argsort(fs, kind="stable")
    return SimplexResult(sim[order[0]].copy(), float(fs[order[0]]), it, evals, converged)


def _safe(f, x) -> float:
    v = f(x)
    if v is None or math.isnan(v):
        return math.inf
    return float(v)


@dataclass
class Hessian:
    matrix: np.ndarray
    one_sided: tuple[bool, ...]


def fd_hessian(f, x, lower=None, upper=None, rel_step=1e-5, min_step=1e-5) -> Hessian:
    """Central-difference Hessian with step max(min_step, rel_step*|x_j|).

    A coordinate whose central stencil would cross ``lower``/``upper`` is
    differenced one-sidedly (forward from a lower bound, backward from an
    upper bound).  All stencils are exact on quadratics.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    h = np.maximum(min_step, rel_step * np.abs(x))
    # direction of a one-sided stencil; 0 means central
    side = np.zeros(n, dtype=int)
    side[x - h <= lower] = 1
    side[(x + h >= upper) & (side == 0)] = -1

    cache: dict[tuple[int, ...], float] = {}

    def fe(offsets):
        key = tuple(offsets)
        if key not in cache:
            cache[key] = float(f(x + np.asarray(offsets, dtype=float) * h))
        return cache[key]

    def unit(i, a, j=None, b=0):
        o = [0] * n
        o[i] += a
        if j is not None:
            o[j] += b
        return o

    f0 = fe([0] * n)
    H = np.empty((n, n))
    for i in range(n):
        s = side[i]
        if s == 0:
            H[i, i] = (fe(unit(i, 1)) - 2 * f0 + fe(unit(i, -1))) / h[i] ** 2
        else:
            H[i, i] = (fe(unit(i, 2 * s)) - 2 * fe(unit(i, s)) + f0) / h[i] ** 2
    for i in range(n):
        for j in range(i + 1, n):
            si, sj = side[i], side[j]
            if si == 0 and sj == 0:
                v = (
                    fe(unit(i, 1, j, 1)) - fe(unit(i, 1, j, -1))
                    - fe(unit(i, -1, j, 1)) + fe(unit(i, -1, j, -1))
                ) / (4 * h[i] * h[j])
            elif si != 0 and sj != 0:
                v = (
                    fe(unit(i, si, j, sj)) - fe(unit(i, si)) - fe(unit(j, sj)) + f0
                ) / (si * sj * h[i] * h[j])
            else:
                # one-sided in a, central in b
                a, b, sa = (i, j, si) if si != 0 else (j, i, sj)
                v = (
                    fe(unit(a, sa, b, 1)) - fe(unit(a, sa, b, -1))
                    - fe(unit(b, 1)) + fe(unit(b, -1))
                ) / (2 * sa * h[a] * h[b])
            H[i, j] = H[j, i] = v
    return Hessian(H, tuple(bool(s) for s in side))


def fd_gradient(f, x, lower=None, upper=None, rel_step=1e-6, min_step=1e-8) -> np.ndarray:
    """Central differences, one-sided next to a bound."""
    x = np.asarray(x, dtype=float)
    n = x.size
    lower = np.full(n, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    upper = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    g = np.empty(n)
    f0 = None
    for j in range(n):
        h = max(min_step, rel_step * abs(x[j]))
        e = np.zeros(n)
        e[j] = h
        if x[j] - h <= lower[j]:
            f0 = f(x) if f0 is None else f0
            g[j] = (f(x + e) - f0) / h
        elif x[j] + h >= upper[j]:
            f0 = f(x) if f0 is None else f0
            g[j] = (f0 - f(x - e)) / h
        else:
            g[j] = (f(x + e) - f(x - e)) / (2 * h)
    return g
