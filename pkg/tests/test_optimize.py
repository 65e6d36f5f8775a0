import math

import numpy as np
import pytest

from discrete_extremes.optimize import fd_gradient, fd_hessian, nelder_mead

A = np.array([[4.0, 1.2, -0.3], [1.2, 2.0, 0.5], [-0.3, 0.5, 1.5]])
X0 = np.array([0.7, -1.1, 2.3])


def quad(x):
    d = np.asarray(x) - X0
    return 0.5 * d @ A @ d


def test_simplex_finds_quadratic_minimum():
    r = nelder_mead(quad, np.zeros(3))
    assert r.converged
    np.testing.assert_allclose(r.x, X0, atol=1e-4)


def test_simplex_rosenbrock():
    def rosen(z):
        return (1 - z[0]) ** 2 + 100 * (z[1] - z[0] ** 2) ** 2

    r = nelder_mead(rosen, np.array([-1.2, 1.0]), tol=1e-14, max_iter=5000)
    np.testing.assert_allclose(r.x, [1, 1], atol=1e-4)


def test_simplex_retreats_from_infinite_region():
    def f(z):
        return math.inf if z[0] < 0 else (z[0] - 0.25) ** 2 + z[1] ** 2

    r = nelder_mead(f, np.array([1.0, 1.0]))
    assert r.converged
    np.testing.assert_allclose(r.x, [0.25, 0.0], atol=1e-4)


def test_simplex_iteration_limit_reported():
    r = nelder_mead(quad, np.zeros(3), max_iter=3)
    assert not r.converged
    assert r.iterations <= 3


def test_hessian_exact_on_quadratic():
    h = fd_hessian(quad, X0)
    np.testing.assert_allclose(h.matrix, A, atol=1e-8)
    assert not any(h.one_sided)


def test_hessian_one_sided_at_bounds():
    lower = np.array([X0[0], -np.inf, -np.inf])
    upper = np.array([np.inf, np.inf, X0[2]])
    h = fd_hessian(quad, X0, lower, upper)
    assert h.one_sided == (True, False, True)
    np.testing.assert_allclose(h.matrix, A, atol=1e-7)


def test_hessian_one_sided_never_crosses_bound():
    seen = []

    def f(x):
        assert x[0] >= 0
        seen.append(x[0])
        return quad(x)

    fd_hessian(f, np.array([0.0, 0.0, 0.0]), lower=np.array([0.0, -np.inf, -np.inf]))
    assert min(seen) == 0


def test_gradient_of_quadratic():
    x = np.array([1.0, 2.0, -1.0])
    np.testing.assert_allclose(fd_gradient(quad, x), A @ (x - X0), rtol=1e-6)
