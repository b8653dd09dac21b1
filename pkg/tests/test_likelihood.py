"""Quadratic likelihood bound: geometry, refresh and expected log-likelihood."""

import numpy as np
import pytest

from vbpoisson.core import Dataset
from vbpoisson.errors import DivergenceError
from vbpoisson.likelihood import approx_loglik, quad_bound, refresh


def test_bound_touches_exponential_at_expansion_point():
    for xi in (-3.0, -0.5, 0.0, 1.2, 4.0):
        assert quad_bound(xi, xi) == pytest.approx(np.exp(xi), rel=1e-12)


def test_bound_sits_below_exponential_beyond_the_expansion_point():
    xs = np.linspace(-4.0, 4.0, 41)
    for xi in xs:
        for x in xs:
            diff = quad_bound(x, xi) - np.exp(x)
            if x > xi:
                assert diff < 0.0
            elif x < xi:
                assert diff > 0.0


def test_refresh_builds_weighted_moments():
    rng = np.random.default_rng(0)
    x = np.column_stack([np.ones(5), rng.standard_normal((5, 2))])
    y = rng.poisson(1.0, size=5).astype(float)
    ds = Dataset(x, y)
    xi = rng.standard_normal(5)
    q = refresh(xi, ds)
    np.testing.assert_allclose(q.m_xi, np.exp(xi) * (1.0 - xi), rtol=1e-12)
    expected = (x * np.exp(xi)[:, None]).T @ x
    np.testing.assert_allclose(q.s_x_xi, expected, rtol=1e-12)
    np.testing.assert_allclose(q.s_x_xi, q.s_x_xi.T, rtol=0, atol=0)


def test_refresh_rejects_overflowing_expansion():
    ds = Dataset(np.ones((1, 1)), np.zeros(1))
    with pytest.raises(DivergenceError):
        refresh(np.array([701.0]), ds)


def test_expected_loglik_single_zero_count():
    # one observation, intercept only, count 0, point-mass posterior at 0:
    # the bound evaluates to -exp(0) = -1
    ds = Dataset(np.ones((1, 1)), np.zeros(1))
    q = refresh(np.zeros(1), ds)
    mu = np.zeros(1)
    d = np.zeros((1, 1))
    assert approx_loglik(q, ds, mu, d) == pytest.approx(-1.0, rel=1e-12)


def test_expected_loglik_matches_poisson_at_degenerate_posterior():
    # with a point-mass posterior and the expansion at the same point, the
    # bound equals the exact Poisson log-likelihood up to the y! constant
    rng = np.random.default_rng(1)
    x = np.column_stack([np.ones(8), rng.standard_normal((8, 2))])
    beta = np.array([0.3, 0.2, -0.1])
    y = rng.poisson(np.exp(x @ beta)).astype(float)
    ds = Dataset(x, y)
    eta = x @ beta
    q = refresh(eta, ds)
    val = approx_loglik(q, ds, beta, np.outer(beta, beta))
    exact = float(y @ eta - np.sum(np.exp(eta)))
    assert val == pytest.approx(exact, rel=1e-10)


def test_expected_loglik_decreases_with_extra_variance():
    rng = np.random.default_rng(2)
    x = np.column_stack([np.ones(10), rng.standard_normal((10, 2))])
    y = rng.poisson(1.5, size=10).astype(float)
    ds = Dataset(x, y)
    mu = np.array([0.1, 0.0, 0.0])
    q = refresh(x @ mu, ds)
    tight = approx_loglik(q, ds, mu, np.outer(mu, mu))
    loose = approx_loglik(q, ds, mu, np.outer(mu, mu) + 0.5 * np.eye(3))
    assert loose < tight
