"""Diagonal normal-gamma mixture components.

Per dimension d the prior is

    tau_d = 1 / sigma2_d ~ Gamma(shape=A_d, rate=B_d)
    mu_d | sigma2_d     ~ Normal(eta_d, sigma2_d / lam)

Gamma draws always use the *rate* parameterization (numpy takes a scale, so
we pass ``1 / B``).

The batch posterior uses ``S``, the biased (divide-by-n) within-cluster
variance, so ``n * S / 2`` is half the within-cluster sum of squares.  The
shape update is ``A + n / 2`` with ``n`` the cluster size; the shrinkage
term of the rate update is centred on the prior mean ``eta``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DataError

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class NormalGammaParams:
    eta: np.ndarray
    lam: float
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "eta", np.atleast_1d(np.asarray(self.eta, dtype=float)))
        object.__setattr__(self, "A", np.broadcast_to(np.asarray(self.A, dtype=float), self.eta.shape).copy())
        object.__setattr__(self, "B", np.broadcast_to(np.asarray(self.B, dtype=float), self.eta.shape).copy())
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if np.any(self.A <= 0) or np.any(self.B <= 0):
            raise ValueError("gamma shape and rate must be positive")

    @property
    def D(self) -> int:
        return self.eta.shape[0]

    def __eq__(self, other):
        if not isinstance(other, NormalGammaParams):
            return NotImplemented
        return (self.lam == other.lam and np.array_equal(self.eta, other.eta)
                and np.array_equal(self.A, other.A) and np.array_equal(self.B, other.B))

    __hash__ = None


@dataclass(frozen=True)
class ComponentParams:
    mu: np.ndarray
    sigma2: np.ndarray


def log_likelihood(x, theta: ComponentParams) -> float:
    """sum_d log N(x_d | mu_d, sigma2_d)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mu, s2 = np.atleast_1d(theta.mu), np.atleast_1d(theta.sigma2)
    if x.shape != mu.shape or mu.shape != s2.shape:
        raise ValueError(f"dimension mismatch: x{x.shape}, mu{mu.shape}, sigma2{s2.shape}")
    return float(-0.5 * np.sum(_LOG_2PI + np.log(s2) + (x - mu) ** 2 / s2))


def log_likelihood_matrix(X: np.ndarray, mu: np.ndarray, sigma2: np.ndarray) -> np.ndarray:
    """N x K matrix of log f(X_n | theta_k) for K diagonal components.

    ``mu`` and ``sigma2`` are K x D.
    """
    prec = 1.0 / sigma2
    const = np.sum(mu * mu * prec + np.log(sigma2), axis=1) + X.shape[1] * _LOG_2PI
    quad = (X * X) @ prec.T - 2.0 * (X @ (mu * prec).T)
    return -0.5 * (quad + const)


def cluster_posteriors(prior: NormalGammaParams, X: np.ndarray, labels: np.ndarray, K: int):
    """Posterior (eta, lam, A, B) for every cluster at once.

    Returns K x D arrays ``eta, A, B`` and a length-K ``lam``.  Empty clusters
    get the prior back unchanged.
    """
    n = np.bincount(labels, minlength=K).astype(float)
    Z = np.zeros((X.shape[0], K))
    Z[np.arange(X.shape[0]), labels] = 1.0
    sums = Z.T @ X
    safe_n = np.maximum(n, 1.0)[:, None]
    xbar = sums / safe_n
    dev = X - xbar[labels]
    ss = Z.T @ (dev * dev)  # n * S
    lam0 = prior.lam
    lam = lam0 + n
    nk = n[:, None]
    eta = (lam0 * prior.eta + sums) / lam[:, None]
    A = prior.A + nk / 2.0
    B = prior.B + ss / 2.0 + lam0 * nk * (xbar - prior.eta) ** 2 / (2.0 * lam[:, None])
    empty = n == 0
    if empty.any():
        eta[empty] = prior.eta
        A[empty] = prior.A
        B[empty] = prior.B
    return eta, lam, A, B


def posterior_update(prior: NormalGammaParams, cluster_data) -> NormalGammaParams:
    """Conjugate update of ``prior`` with the points in ``cluster_data``."""
    X = np.asarray(cluster_data, dtype=float)
    if X.size == 0:
        return prior
    X = X.reshape(-1, prior.D)
    eta, lam, A, B = cluster_posteriors(prior, X, np.zeros(X.shape[0], dtype=np.int64), 1)
    return NormalGammaParams(eta[0], float(lam[0]), A[0], B[0])


def sample_components(eta, lam, A, B, rng: np.random.Generator):
    """Vectorized draw of (mu, sigma2); arrays broadcast against ``eta``."""
    A = np.broadcast_to(A, np.shape(eta))
    B = np.broadcast_to(B, np.shape(eta))
    tau = rng.gamma(A, 1.0 / B)
    sigma2 = 1.0 / tau
    lam = np.asarray(lam, dtype=float)
    if lam.ndim:
        lam = lam.reshape(lam.shape + (1,) * (np.ndim(eta) - lam.ndim))
    mu = eta + np.sqrt(sigma2 / lam) * rng.standard_normal(np.shape(eta))
    return mu, sigma2


def sample_component(posterior: NormalGammaParams, rng: np.random.Generator) -> ComponentParams:
    mu, sigma2 = sample_components(posterior.eta, posterior.lam, posterior.A, posterior.B, rng)
    return ComponentParams(mu, sigma2)


def default_hyperparams(data) -> NormalGammaParams:
    """Data-scaled prior: eta = column means, lam = 1, A = 1, B = column variances."""
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < 2:
        raise DataError("need at least two objects to set default hyperparameters")
    var = X.var(axis=0, ddof=1)
    bad = np.flatnonzero(~(var > 0))
    if bad.size:
        raise DataError(
            f"zero-variance feature column(s) {bad.tolist()}; drop or jitter them before fitting")
    return NormalGammaParams(X.mean(axis=0), 1.0, np.ones(X.shape[1]), var)
