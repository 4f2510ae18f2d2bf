"""Gibbs sampler for Bayesian consensus clustering.

One iteration updates, in this order,

1. component parameters theta_mk (normal-gamma conjugate draws),
2. source labels L_mn,  P(k) ~ nu(k, C_n, alpha_m) f_m(X_mn | theta_mk),
3. adherence alpha_m ~ TBeta(a_m + tau_m, b_m + N - tau_m, 1/K)
   (or one shared alpha ~ TBeta(a + tau, b + NM - tau, 1/K)),
4. overall labels C_n,  P(k) ~ pi_k prod_m nu(k, L_mn, alpha_m),
5. pi ~ Dirichlet(beta0 + counts(C)).

RNG stream layout.  ``SeedSequence(seed).spawn(M + 2)`` gives
``[init, source_1, ..., source_M, shared]``.  The init stream drives K-means
seeding / random labels and the initial theta draw; stream ``source_m`` owns
every theta_m and L_m draw; ``shared`` owns the alpha, C and pi draws.  The
per-source blocks are therefore reproducible regardless of the order (or
concurrency) in which sources are processed.
"""
from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.special import betainc, betaincc, betaincinv, betainccinv

from .dataset import MultiSourceDataset
from .exceptions import ConfigurationError, DegenerateDistributionError
from .kmeans import align_labels, kmeans
from .model import ModelConfig
from .normal_gamma import (ComponentParams, NormalGammaParams, cluster_posteriors,
                           default_hyperparams, log_likelihood_matrix, sample_components)


class InitStrategy(str, enum.Enum):
    KMEANS = "kmeans"
    RANDOM = "random"
    GIVEN = "given"


@dataclass(frozen=True)
class ChainConfig:
    """Chain settings.  ``iterations`` counts burn-in, so a run keeps
    ``(iterations - burn_in) // thin`` states."""

    iterations: int = 1200
    burn_in: int = 200
    thin: int = 1
    seed: int = 0
    model: ModelConfig = field(default_factory=lambda: ModelConfig(K=2))
    alpha_prior: tuple | Sequence = (1.0, 1.0)
    beta0: float | Sequence[float] = 1.0
    init_strategy: InitStrategy = InitStrategy.KMEANS
    keep_theta: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigurationError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ConfigurationError("burn_in must satisfy 0 <= burn_in < iterations")
        if self.thin < 1:
            raise ConfigurationError("thin must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "init_strategy", InitStrategy(self.init_strategy))

    @property
    def K(self) -> int:
        return self.model.K

    @property
    def n_saved(self) -> int:
        return (self.iterations - self.burn_in) // self.thin

    def alpha_priors(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        ab = np.asarray(self.alpha_prior, dtype=float)
        if ab.shape == (2,):
            ab = np.tile(ab, (n, 1))
        if ab.shape != (n, 2):
            raise ConfigurationError(f"alpha_prior must be (a, b) or {n} pairs")
        if np.any(ab <= 0):
            raise ConfigurationError("alpha prior parameters must be positive")
        return ab[:, 0].copy(), ab[:, 1].copy()

    def beta0_vector(self) -> np.ndarray:
        b = np.broadcast_to(np.asarray(self.beta0, dtype=float), (self.K,)).copy()
        if np.any(b <= 0):
            raise ConfigurationError("beta0 entries must be positive")
        return b


@dataclass
class ChainState:
    C: np.ndarray            # (N,)
    L: np.ndarray            # (M, N)
    alpha: np.ndarray        # (M,)
    pi: np.ndarray           # (K,)
    mu: list                 # M arrays of shape (K, D_m)
    sigma2: list             # M arrays of shape (K, D_m)

    def theta(self, m: int, k: int) -> ComponentParams:
        return ComponentParams(self.mu[m][k], self.sigma2[m][k])

    def copy(self) -> "ChainState":
        return ChainState(self.C.copy(), self.L.copy(), self.alpha.copy(), self.pi.copy(),
                          [a.copy() for a in self.mu], [a.copy() for a in self.sigma2])

    def check(self, K: int, equal_alpha: bool = False) -> None:
        M, N = self.L.shape
        assert self.C.shape == (N,)
        assert self.C.min() >= 0 and self.C.max() < K
        assert self.L.min() >= 0 and self.L.max() < K
        assert self.alpha.shape == (M,)
        assert np.all(self.alpha >= 1.0 / K) and np.all(self.alpha <= 1.0)
        if equal_alpha:
            assert np.all(self.alpha == self.alpha[0])
        assert self.pi.shape == (K,) and np.all(self.pi >= 0)
        assert abs(self.pi.sum() - 1.0) < 1e-12
        assert len(self.mu) == M and all(s.shape[0] == K and np.all(s > 0) for s in self.sigma2)


@dataclass
class PosteriorDraws:
    """Saved post-burn-in draws plus full-length traces.

    ``C`` is ``None`` for samplers without an overall clustering.  ``pi`` is
    (S, K) for the consensus model and (S, M, K) for per-source weights.
    """

    L: np.ndarray
    C: np.ndarray | None
    alpha: np.ndarray | None
    pi: np.ndarray
    trace_alpha: np.ndarray | None
    trace_pi: np.ndarray
    K: int
    mu: list | None = None
    sigma2: list | None = None
    diagnostics: Counter = field(default_factory=Counter)

    @property
    def n_saved(self) -> int:
        return self.L.shape[0]

    @property
    def states(self) -> list[ChainState]:
        if self.C is None or self.mu is None:
            raise AttributeError("states require an overall clustering and kept theta draws")
        return [ChainState(self.C[s], self.L[s], self.alpha[s], self.pi[s], self.mu[s], self.sigma2[s])
                for s in range(self.n_saved)]


# -- random helpers ----------------------------------------------------------

def derive_seed(seed: int, *keys: int) -> int:
    """Deterministic 64-bit child seed for (seed, keys...)."""
    state = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(2, np.uint32)
    return int(state[0]) | (int(state[1]) << 32)


def make_streams(seed: int, M: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(int(seed)).spawn(M + 2)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def sample_categorical(logp: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One draw per row of an unnormalized N x K log-probability matrix."""
    mx = logp.max(axis=1, keepdims=True)
    if not np.all(np.isfinite(mx)):
        raise DegenerateDistributionError("label conditional with zero total mass")
    cum = np.cumsum(np.exp(logp - mx), axis=1)
    u = rng.random(logp.shape[0]) * cum[:, -1]
    out = (cum <= u[:, None]).sum(axis=1)
    return np.minimum(out, logp.shape[1] - 1)


def sample_truncated_beta(a, b, lower, rng: np.random.Generator, size=None, counter: Counter | None = None):
    """Draw from Beta(a, b) conditioned on exceeding ``lower`` by inverse CDF.

    The uniform is mapped through the CDF branch when the target quantile is
    below 1/2 and through the survival branch otherwise, keeping precision in
    both tails.  If (numerically) no mass remains above ``lower`` the draw is
    ``lower + eps`` and ``counter['tbeta_truncation']`` is incremented.
    """
    if size is None and np.ndim(a) == 0 and np.ndim(b) == 0 and np.ndim(lower) == 0:
        return _tbeta_scalar(float(a), float(b), float(lower), rng, counter)
    a, b, lower = (np.asarray(v, dtype=float) for v in (a, b, lower))
    if np.any(a <= 0) or np.any(b <= 0):
        raise ValueError("beta parameters must be positive")
    if np.any(lower < 0) or np.any(lower >= 1):
        raise ValueError("truncation point must lie in [0, 1)")
    shape = np.broadcast_shapes(a.shape, b.shape, lower.shape) if size is None else size
    a, b, lower = (np.broadcast_to(v, shape) for v in (a, b, lower))
    F_low = betainc(a, b, lower)
    S_low = betaincc(a, b, lower)
    v = rng.random(shape)
    p = F_low + v * S_low
    s = (1.0 - v) * S_low
    with np.errstate(all="ignore"):
        x = np.where(p < 0.5, betaincinv(a, b, p), betainccinv(a, b, s))
    eps = 1e-12
    stuck = S_low <= 1e-15
    if np.any(stuck):
        if counter is not None:
            counter["tbeta_truncation"] += int(np.sum(stuck))
        x = np.where(stuck, np.minimum(lower + eps, 1.0), x)
    x = np.clip(x, lower, 1.0)
    return float(x) if np.ndim(x) == 0 else x


def _tbeta_scalar(a: float, b: float, lower: float, rng, counter) -> float:
    if not (a > 0 and b > 0):
        raise ValueError("beta parameters must be positive")
    if not 0.0 <= lower < 1.0:
        raise ValueError("truncation point must lie in [0, 1)")
    S_low = float(betaincc(a, b, lower))
    v = rng.random()
    if S_low <= 1e-15:
        if counter is not None:
            counter["tbeta_truncation"] += 1
        return min(lower + 1e-12, 1.0)
    p = float(betainc(a, b, lower)) + v * S_low
    x = float(betaincinv(a, b, p)) if p < 0.5 else float(betainccinv(a, b, (1.0 - v) * S_low))
    return min(max(x, lower), 1.0)


# -- the chain ---------------------------------------------------------------

def _log_nu(alpha, K: int):
    # alpha is in [1/K, 1] by construction inside the chain
    with np.errstate(divide="ignore"):
        return np.log(alpha), np.log1p(-alpha) - np.log(K - 1)


def _as_dataset(data) -> MultiSourceDataset:
    if isinstance(data, MultiSourceDataset):
        return data
    return MultiSourceDataset(list(data))


class _BCC:
    """Cached arrays for one chain; ``step`` mutates ``state`` in place."""

    def __init__(self, data: MultiSourceDataset, config: ChainConfig, priors=None):
        self.X = data.sources
        self.N, self.M = data.N, data.M
        self.model = config.model.bind(self.N, self.M)
        self.K = self.model.K
        self.priors = list(priors) if priors is not None else [default_hyperparams(X) for X in self.X]
        if len(self.priors) != self.M:
            raise ConfigurationError("need one normal-gamma prior per source")
        self.a, self.b = config.alpha_priors(self.M)
        if self.model.equal_alpha and (np.ptp(self.a) > 0 or np.ptp(self.b) > 0):
            raise ConfigurationError("equal-adherence model needs one shared alpha prior")
        self.beta0 = config.beta0_vector()
        self.counter = Counter()
        self.ks = np.arange(self.K)

    def draw_theta(self, state: ChainState, m: int, rng) -> None:
        eta, lam, A, B = cluster_posteriors(self.priors[m], self.X[m], state.L[m], self.K)
        state.mu[m], state.sigma2[m] = sample_components(eta, lam, A, B, rng)

    def draw_labels(self, state: ChainState, m: int, rng) -> None:
        same, diff = _log_nu(state.alpha[m], self.K)
        logp = log_likelihood_matrix(self.X[m], state.mu[m], state.sigma2[m])
        logp += np.where(self.ks[None, :] == state.C[:, None], same, diff)
        state.L[m] = sample_categorical(logp, rng)

    def draw_alpha(self, state: ChainState, rng) -> None:
        tau = (state.L == state.C[None, :]).sum(axis=1)
        lower = 1.0 / self.K
        if self.model.equal_alpha:
            t = tau.sum()
            val = sample_truncated_beta(self.a[0] + t, self.b[0] + self.N * self.M - t, lower, rng,
                                        counter=self.counter)
            state.alpha[:] = val
        else:
            state.alpha[:] = sample_truncated_beta(self.a + tau, self.b + self.N - tau, lower, rng,
                                                   counter=self.counter)

    def draw_overall(self, state: ChainState, rng) -> None:
        same, diff = _log_nu(state.alpha, self.K)
        with np.errstate(divide="ignore"):
            logp = np.tile(np.log(state.pi), (self.N, 1))
        for m in range(self.M):
            logp += np.where(state.L[m][:, None] == self.ks[None, :], same[m], diff[m])
        state.C = sample_categorical(logp, rng)

    def draw_pi(self, state: ChainState, rng) -> None:
        rho = np.bincount(state.C, minlength=self.K)
        pi = rng.dirichlet(self.beta0 + rho)
        state.pi = pi / pi.sum()

    def step(self, state: ChainState, streams) -> ChainState:
        for m in range(self.M):
            self.draw_theta(state, m, streams[1 + m])
            self.draw_labels(state, m, streams[1 + m])
        shared = streams[-1]
        self.draw_alpha(state, shared)
        self.draw_overall(state, shared)
        self.draw_pi(state, shared)
        return state

    def initialize(self, config: ChainConfig, rng) -> ChainState:
        K, N, M = self.K, self.N, self.M
        if config.init_strategy == InitStrategy.KMEANS:
            L = np.vstack([kmeans(X, K, rng) for X in self.X])
            # K-means names clusters arbitrarily; match names across sources
            for m in range(1, M):
                L[m] = align_labels(L[m], L[0], K)
        else:
            L = rng.integers(K, size=(M, N))
        counts = np.zeros((N, K), dtype=np.int64)
        for m in range(M):
            counts[np.arange(N), L[m]] += 1
        C = np.argmax(counts, axis=1)
        alpha = np.full(M, (1.0 + 1.0 / K) / 2.0)
        pi = np.full(K, 1.0 / K)
        state = ChainState(C, L, alpha, pi, [None] * M, [None] * M)
        for m in range(M):
            self.draw_theta(state, m, rng)
        return state


def initialize(data, config: ChainConfig, rng=None, priors=None) -> ChainState:
    """Starting state: K-means (or random) source labels, renamed to agree
    with source 1 as far as possible, plurality overall
    labels (ties to the lowest label), alpha at the midpoint of [1/K, 1],
    uniform pi and theta drawn from the conditional posterior."""
    data = _as_dataset(data)
    sampler = _BCC(data, config, priors)
    if rng is None:
        rng = make_streams(config.seed, data.M)[0]
    return sampler.initialize(config, rng)


def step(state: ChainState, data, config: ChainConfig, streams, priors=None) -> ChainState:
    """One full Gibbs sweep; returns a new state and leaves ``state`` untouched."""
    data = _as_dataset(data)
    return _BCC(data, config, priors).step(state.copy(), streams)


def run_chain(data, config: ChainConfig, initial_state: ChainState | None = None,
              priors=None) -> PosteriorDraws:
    """Initialize and run ``config.iterations`` sweeps (burn-in included)."""
    data = _as_dataset(data)
    sampler = _BCC(data, config, priors)
    streams = make_streams(config.seed, data.M)
    if config.init_strategy == InitStrategy.GIVEN:
        if initial_state is None:
            raise ConfigurationError("init_strategy=GIVEN requires an initial_state")
        state = initial_state.copy()
    else:
        state = sampler.initialize(config, streams[0])
    K, M, N = sampler.K, sampler.M, sampler.N
    S = config.n_saved
    T = config.iterations
    out_C = np.empty((S, N), dtype=np.int64)
    out_L = np.empty((S, M, N), dtype=np.int64)
    out_alpha = np.empty((S, M))
    out_pi = np.empty((S, K))
    out_mu, out_s2 = ([], []) if config.keep_theta else (None, None)
    trace_alpha = np.empty((T, M))
    trace_pi = np.empty((T, K))
    s = 0
    for it in range(1, T + 1):
        sampler.step(state, streams)
        trace_alpha[it - 1] = state.alpha
        trace_pi[it - 1] = state.pi
        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            if __debug__:
                state.check(K, sampler.model.equal_alpha)
            out_C[s], out_L[s], out_alpha[s], out_pi[s] = state.C, state.L, state.alpha, state.pi
            if config.keep_theta:
                out_mu.append([a.copy() for a in state.mu])
                out_s2.append([a.copy() for a in state.sigma2])
            s += 1
    return PosteriorDraws(out_L, out_C, out_alpha, out_pi, trace_alpha, trace_pi, K,
                          out_mu, out_s2, sampler.counter)


def with_model(config: ChainConfig, **model_changes) -> ChainConfig:
    return replace(config, model=replace(config.model, **model_changes))
