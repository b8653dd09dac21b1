"""Sampler components and the marginal accuracy score."""

import numpy as np
import pytest
from scipy import stats

from vbpoisson.core import Dataset, Hyperparameters, Method
from vbpoisson.mcmc import (
    Chain,
    McmcConfig,
    _gig_half,
    accuracy,
    accuracy_discrete,
    sample,
)


def test_config_validation():
    with pytest.raises(ValueError):
        McmcConfig(iterations=100, burn_in=100)
    with pytest.raises(ValueError):
        McmcConfig(thin=0)
    with pytest.raises(ValueError):
        McmcConfig(step_scale=0.0)


def test_gig_sampler_matches_closed_form_moments():
    # order-1/2 draws: E(t) = sqrt(b/a) + 1/a and E(1/t) = sqrt(a/b)
    rng = np.random.default_rng(14)
    for a, b in [(1.0, 1.0), (2.0, 0.5), (0.7, 3.0)]:
        draws = np.array([_gig_half(rng, a, b) for _ in range(200000)])
        assert draws.mean() == pytest.approx(np.sqrt(b / a) + 1.0 / a, rel=0.02)
        assert (1.0 / draws).mean() == pytest.approx(np.sqrt(a / b), rel=0.02)


def test_accuracy_is_high_for_a_matched_normal():
    rng = np.random.default_rng(6)
    draws = rng.normal(1.0, 0.5, size=2000)
    score = accuracy(lambda t: stats.norm.pdf(t, 1.0, 0.5), draws)
    assert score > 93.0


def test_accuracy_is_low_for_a_shifted_normal():
    rng = np.random.default_rng(6)
    draws = rng.normal(1.0, 0.5, size=2000)
    score = accuracy(lambda t: stats.norm.pdf(t, 5.0, 0.5), draws)
    assert score < 10.0


def test_accuracy_requires_enough_draws():
    with pytest.raises(ValueError):
        accuracy(lambda t: stats.norm.pdf(t), np.zeros(50))


def test_accuracy_handles_a_constant_chain():
    draws = np.full(500, 2.0)
    tight = accuracy(lambda t: stats.norm.pdf(t, 2.0, 1e-5), draws)
    assert tight > 95.0
    far = accuracy(lambda t: stats.norm.pdf(t, 10.0, 1e-5), draws)
    assert far < 5.0


def test_discrete_accuracy_hand_values():
    chain = np.array([1.0, 1.0, 1.0, 0.0])
    assert accuracy_discrete(0.75, chain) == pytest.approx(100.0)
    assert accuracy_discrete(0.5, chain) == pytest.approx(75.0)
    assert accuracy_discrete(1.0, np.zeros(10)) == pytest.approx(0.0)


def _conjugate_dataset(seed=19):
    rng = np.random.default_rng(seed)
    n = 120
    x = np.column_stack([np.ones(n), rng.standard_normal((n, 2))])
    beta = np.array([0.6, 0.8, 0.0])
    y = rng.poisson(np.exp(x @ beta)).astype(float)
    return Dataset(x, y), beta


@pytest.mark.parametrize("model", [Method.LAPLACE, Method.CS, Method.BERNOULLI])
def test_short_chains_recover_strong_signals(model):
    ds, beta = _conjugate_dataset()
    mc = McmcConfig(iterations=3000, burn_in=1000, thin=5, seed=3)
    chain = sample(model, ds, Hyperparameters(), mc)
    assert chain.draws.shape[0] == 400
    assert 0.01 <= chain.acceptance_rate <= 1.0
    b0 = chain.column("beta0")
    b1 = chain.column("beta1")
    assert abs(b0.mean() - beta[0]) < 0.3
    assert abs(b1.mean() - beta[1]) < 0.3


def test_sampler_is_deterministic_for_a_fixed_seed():
    ds, _ = _conjugate_dataset()
    mc = McmcConfig(iterations=600, burn_in=200, thin=2, seed=11)
    a = sample(Method.LAPLACE, ds, Hyperparameters(), mc)
    b = sample(Method.LAPLACE, ds, Hyperparameters(), mc)
    np.testing.assert_array_equal(a.draws, b.draws)
    assert a.acceptance_rate == b.acceptance_rate


def test_chain_column_lookup():
    chain = Chain(
        draws=np.array([[1.0, 2.0], [3.0, 4.0]]),
        param_names=["beta0", "beta1"],
        acceptance_rate=0.3,
    )
    np.testing.assert_array_equal(chain.column("beta1"), [2.0, 4.0])
    with pytest.raises(ValueError):
        chain.column("missing")
