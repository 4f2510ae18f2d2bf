import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from bcc.exceptions import DataError
from bcc.normal_gamma import (ComponentParams, NormalGammaParams, cluster_posteriors, default_hyperparams,
                              log_likelihood, log_likelihood_matrix, posterior_update, sample_component)

from oracles import grid_posterior_tv


def test_log_likelihood_standard_normal():
    assert log_likelihood([0.0], ComponentParams(np.zeros(1), np.ones(1))) == pytest.approx(
        -0.5 * np.log(2 * np.pi), abs=1e-15)


def test_log_likelihood_adds_over_dimensions():
    theta = ComponentParams(np.array([1.0, -2.0]), np.array([0.5, 3.0]))
    one = [log_likelihood([x], ComponentParams(theta.mu[d:d + 1], theta.sigma2[d:d + 1]))
           for d, x in enumerate([0.3, 0.1])]
    assert log_likelihood([0.3, 0.1], theta) == pytest.approx(sum(one), rel=1e-14)


def test_log_likelihood_dimension_mismatch():
    with pytest.raises(ValueError):
        log_likelihood([0.0, 1.0], ComponentParams(np.zeros(1), np.ones(1)))


@given(seed=st.integers(0, 2**32 - 1), D=st.integers(1, 5))
def test_log_likelihood_matches_density_product(seed, D):
    rng = np.random.default_rng(seed)
    x, mu = rng.normal(size=D), rng.normal(size=D)
    s2 = rng.uniform(0.1, 4, D)
    ref = np.prod(stats.norm.pdf(x, mu, np.sqrt(s2)))
    assert np.exp(log_likelihood(x, ComponentParams(mu, s2))) == pytest.approx(ref, rel=1e-12)


def test_log_likelihood_matrix_agrees_with_scalar(rng):
    X = rng.normal(size=(7, 3))
    mu = rng.normal(size=(4, 3))
    s2 = rng.uniform(0.2, 2, (4, 3))
    mat = log_likelihood_matrix(X, mu, s2)
    for n in range(7):
        for k in range(4):
            assert mat[n, k] == pytest.approx(log_likelihood(X[n], ComponentParams(mu[k], s2[k])), rel=1e-12)


def test_posterior_update_empty_returns_prior():
    prior = NormalGammaParams([0.5], 1.0, [2.0], [3.0])
    assert posterior_update(prior, np.empty((0, 1))) is prior


def test_posterior_update_single_point():
    post = posterior_update(NormalGammaParams([0.0], 1.0, [1.5], [0.7]), [[2.0]])
    assert post.eta[0] == pytest.approx(1.0)
    assert post.lam == 2.0
    assert post.A[0] == pytest.approx(2.0)
    assert post.B[0] == pytest.approx(1.7)


def test_posterior_update_hand_formula(rng):
    x = rng.normal(3, 2, size=(9, 2))
    prior = NormalGammaParams([0.0, 1.0], 2.0, [1.0, 3.0], [1.0, 0.5])
    post = posterior_update(prior, x)
    n, xbar, S = 9, x.mean(0), x.var(0)
    np.testing.assert_allclose(post.eta, (2.0 * prior.eta + n * xbar) / (2.0 + n), rtol=1e-13)
    assert post.lam == 11.0
    np.testing.assert_allclose(post.A, prior.A + 4.5)
    np.testing.assert_allclose(post.B, prior.B + n * S / 2 + 2.0 * n * (xbar - prior.eta) ** 2 / (2 * 11.0),
                               rtol=1e-13)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_posterior_update_matches_grid(seed):
    rng = np.random.default_rng(seed)
    prior = NormalGammaParams([rng.normal()], rng.uniform(0.5, 2), [rng.uniform(1, 3)], [rng.uniform(0.5, 2)])
    x = rng.normal(1.0, 1.3, size=5)
    assert grid_posterior_tv(prior, x, posterior_update(prior, x[:, None])) < 1e-3


def test_grid_oracle_detects_wrong_posterior():
    prior = NormalGammaParams([0.0], 1.0, [2.0], [1.0])
    x = np.array([0.5, 1.2, -0.3, 2.0, 0.9])
    good = posterior_update(prior, x[:, None])
    bad = NormalGammaParams(good.eta, good.lam, good.A, good.B * 1.2)
    assert grid_posterior_tv(prior, x, bad) > 1e-2


@given(arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 3)),
              elements=st.floats(-50, 50)), st.randoms(use_true_random=False))
def test_posterior_update_order_invariant_and_valid(x, rnd):
    prior = NormalGammaParams(np.zeros(x.shape[1]), 1.0, np.ones(x.shape[1]), np.ones(x.shape[1]))
    perm = list(range(x.shape[0]))
    rnd.shuffle(perm)
    a, b = posterior_update(prior, x), posterior_update(prior, x[perm])
    np.testing.assert_allclose(a.eta, b.eta, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(a.B, b.B, rtol=1e-10, atol=1e-10)
    assert a.lam > prior.lam and np.all(a.A > prior.A) and np.all(a.B >= prior.B)


def test_cluster_posteriors_match_per_cluster_update(rng):
    X = rng.normal(size=(30, 2))
    labels = rng.integers(3, size=30)
    labels[labels == 2] = 0  # cluster 2 empty
    prior = default_hyperparams(X)
    eta, lam, A, B = cluster_posteriors(prior, X, labels, 3)
    for k in range(3):
        p = posterior_update(prior, X[labels == k])
        np.testing.assert_allclose(eta[k], p.eta, rtol=1e-12)
        np.testing.assert_allclose(B[k], p.B, rtol=1e-12)
        assert lam[k] == p.lam
    np.testing.assert_array_equal(B[2], prior.B)


def test_sample_component_moments():
    post = NormalGammaParams([0.7, -1.0], 3.0, [4.0, 2.5], [2.0, 5.0])
    rng = np.random.default_rng(11)
    n = 100_000
    draws = [sample_component(post, rng) for _ in range(n)]
    mu = np.array([d.mu for d in draws])
    prec = 1.0 / np.array([d.sigma2 for d in draws])
    # Var(mu) = E[sigma2] / lam = B / ((A - 1) lam)
    se_mu = np.sqrt(post.B / ((post.A - 1) * post.lam) / n)
    assert np.all(np.abs(mu.mean(0) - post.eta) < 3 * se_mu)
    se_prec = np.sqrt(post.A / post.B ** 2 / n)
    assert np.all(np.abs(prec.mean(0) - post.A / post.B) < 3 * se_prec)


def test_sample_component_concentrates():
    post = NormalGammaParams([0.0], 1.0, [1e6], [2e6])
    s2 = np.array([sample_component(post, np.random.default_rng(i)).sigma2[0] for i in range(50)])
    np.testing.assert_allclose(s2, 2.0, rtol=1e-2)


def test_sample_component_deterministic():
    post = NormalGammaParams([0.0], 1.0, [2.0], [2.0])
    a = sample_component(post, np.random.default_rng(5))
    b = sample_component(post, np.random.default_rng(5))
    assert a.mu[0] == b.mu[0] and a.sigma2[0] == b.sigma2[0]


def test_default_hyperparams():
    rng = np.random.default_rng(0)
    Z = rng.normal(size=(50, 2))
    Z = (Z - Z.mean(0)) / Z.std(0, ddof=1)
    p = default_hyperparams(Z)
    np.testing.assert_allclose(p.eta, 0, atol=1e-14)
    np.testing.assert_allclose(p.B, 1, rtol=1e-14)
    np.testing.assert_array_equal(p.A, 1)
    assert p.lam == 1
    col = 5 + 2 * Z[:, :1]
    p = default_hyperparams(col)
    assert p.eta[0] == pytest.approx(5) and p.B[0] == pytest.approx(4)


def test_default_hyperparams_constant_column():
    with pytest.raises(DataError, match="drop or jitter"):
        default_hyperparams(np.column_stack([np.arange(5.0), np.ones(5)]))
