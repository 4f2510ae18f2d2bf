"""Comparison samplers (separate, joint and pairwise-dependent clustering) and
the permutation-aligned relative clustering error."""
from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .dataset import MultiSourceDataset
from .exceptions import ConfigurationError
from .kmeans import align_labels, kmeans
from .normal_gamma import (NormalGammaParams, cluster_posteriors, default_hyperparams,
                           log_likelihood_matrix, sample_components)
from .sampler import (ChainConfig, InitStrategy, PosteriorDraws, _as_dataset, _log_nu,
                      derive_seed, make_streams, sample_categorical, sample_truncated_beta)

MAX_JOINT_LABELS = 4096


def _initial_labels(X, K, config: ChainConfig, rng, given=None):
    if config.init_strategy == InitStrategy.GIVEN:
        if given is None:
            raise ConfigurationError("init_strategy=GIVEN requires initial labels")
        return np.asarray(given, dtype=np.int64).copy()
    if config.init_strategy == InitStrategy.KMEANS:
        return kmeans(X, K, rng)
    return rng.integers(K, size=X.shape[0])


def _check_K(K, N):
    if K > N:
        raise ConfigurationError(f"K={K} exceeds the number of objects N={N}")


def separate_sampler(X, config: ChainConfig, prior: NormalGammaParams | None = None,
                     initial_labels=None) -> PosteriorDraws:
    """Finite normal-gamma mixture for one source.

    Sweep: theta | L, then L_n ~ pi_k f(X_n | theta_k), then pi ~ Dir(beta0 + counts).
    Streams: ``SeedSequence(seed).spawn(3)`` = [init, theta/labels, weights].
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    N = X.shape[0]
    K = config.K
    _check_K(K, N)
    prior = prior if prior is not None else default_hyperparams(X)
    beta0 = config.beta0_vector()
    init, rng, wrng = make_streams(config.seed, 1)
    L = _initial_labels(X, K, config, init, initial_labels)
    pi = np.full(K, 1.0 / K)
    S, T = config.n_saved, config.iterations
    out_L = np.empty((S, 1, N), dtype=np.int64)
    out_pi = np.empty((S, 1, K))
    trace_pi = np.empty((T, 1, K))
    s = 0
    for it in range(1, T + 1):
        eta, lam, A, B = cluster_posteriors(prior, X, L, K)
        mu, s2 = sample_components(eta, lam, A, B, rng)
        with np.errstate(divide="ignore"):
            logp = log_likelihood_matrix(X, mu, s2) + np.log(pi)
        L = sample_categorical(logp, rng)
        pi = wrng.dirichlet(beta0 + np.bincount(L, minlength=K))
        pi /= pi.sum()
        trace_pi[it - 1, 0] = pi
        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            out_L[s, 0], out_pi[s, 0] = L, pi
            s += 1
    return PosteriorDraws(out_L, None, None, out_pi, None, trace_pi, K)


def separate_clusterings(data, config: ChainConfig, priors=None) -> list[PosteriorDraws]:
    """``separate_sampler`` on every source; source m uses seed derive_seed(seed, m)."""
    data = _as_dataset(data)
    out = []
    for m, X in enumerate(data.sources):
        cfg = replace(config, seed=derive_seed(config.seed, m))
        out.append(separate_sampler(X, cfg, None if priors is None else priors[m]))
    return out


def stack_draws(draws: list[PosteriorDraws]) -> PosteriorDraws:
    """Combine single-source draws into one (S, M, N) container."""
    if not draws:
        raise ValueError("nothing to stack")
    return PosteriorDraws(np.concatenate([d.L for d in draws], axis=1), None, None,
                          np.concatenate([d.pi for d in draws], axis=1), None,
                          np.concatenate([d.trace_pi for d in draws], axis=1), draws[0].K)


def concatenated_prior(data: MultiSourceDataset, priors=None) -> NormalGammaParams:
    priors = list(priors) if priors is not None else [default_hyperparams(X) for X in data.sources]
    lams = {p.lam for p in priors}
    if len(lams) != 1:
        raise ConfigurationError("joint clustering needs a common mean-precision scale lam")
    return NormalGammaParams(np.concatenate([p.eta for p in priors]), lams.pop(),
                             np.concatenate([p.A for p in priors]),
                             np.concatenate([p.B for p in priors]))


def joint_sampler(data, config: ChainConfig, priors=None) -> PosteriorDraws:
    """One mixture on the feature-wise concatenation of all sources."""
    data = _as_dataset(data)
    return separate_sampler(data.concatenated(), config, concatenated_prior(data, priors))


def joint_label_table(M: int, K: int) -> np.ndarray:
    if K ** M > MAX_JOINT_LABELS:
        raise ConfigurationError(
            f"dependent clustering enumerates K^M = {K ** M} joint labels (limit "
            f"{MAX_JOINT_LABELS}); its cost grows exponentially with the number of sources")
    return np.array(list(itertools.product(range(K), repeat=M)), dtype=np.int64)


def dependent_label_logmass(logliks, log_pi, alpha_pairs, K: int, combos=None):
    """Unnormalized log mass of every joint label (k_1..k_M) for every object.

    ``logliks`` is a list of N x K matrices, ``log_pi`` is M x K and
    ``alpha_pairs`` holds alpha_{ij} for i < j in ``itertools.combinations``
    order.  Returns ``(combos, N x K^M matrix)``.
    """
    M = len(logliks)
    combos = joint_label_table(M, K) if combos is None else combos
    out = np.zeros((logliks[0].shape[0], combos.shape[0]))
    for m in range(M):
        out += logliks[m][:, combos[:, m]] + log_pi[m][combos[:, m]]
    same, diff = _log_nu(np.asarray(alpha_pairs, dtype=float), K)
    for p, (i, j) in enumerate(itertools.combinations(range(M), 2)):
        out += np.where(combos[:, i] == combos[:, j], same[p], diff[p])[None, :]
    return combos, out


def dependent_sampler(data, config: ChainConfig, priors=None) -> PosteriorDraws:
    """Pairwise-dependence model: alpha_{ij} = P(L_in = L_jn), joint label
    draws over all K^M combinations.

    Streams: ``SeedSequence(seed).spawn(M + 2)`` = [init, theta_1..theta_M,
    shared (joint labels, alpha pairs, weights)].
    """
    data = _as_dataset(data)
    N, M, K = data.N, data.M, config.K
    if M < 2:
        raise ConfigurationError("dependent clustering needs at least two sources")
    _check_K(K, N)
    combos = joint_label_table(M, K)
    pairs = list(itertools.combinations(range(M), 2))
    P = len(pairs)
    priors = list(priors) if priors is not None else [default_hyperparams(X) for X in data.sources]
    a, b = config.alpha_priors(P)
    beta0 = config.beta0_vector()
    streams = make_streams(config.seed, M)
    L = np.vstack([_initial_labels(X, K, config, streams[0]) for X in data.sources])
    if config.init_strategy == InitStrategy.KMEANS:
        for m in range(1, M):
            L[m] = align_labels(L[m], L[0], K)
    pi = np.full((M, K), 1.0 / K)
    alpha = np.full(P, (1.0 + 1.0 / K) / 2.0)
    counter = Counter()
    S, T = config.n_saved, config.iterations
    out_L = np.empty((S, M, N), dtype=np.int64)
    out_alpha = np.empty((S, P))
    out_pi = np.empty((S, M, K))
    trace_alpha = np.empty((T, P))
    trace_pi = np.empty((T, M, K))
    shared = streams[-1]
    s = 0
    for it in range(1, T + 1):
        logliks = []
        for m in range(M):
            eta, lam, A, B = cluster_posteriors(priors[m], data.sources[m], L[m], K)
            mu, s2 = sample_components(eta, lam, A, B, streams[1 + m])
            logliks.append(log_likelihood_matrix(data.sources[m], mu, s2))
        with np.errstate(divide="ignore"):
            log_pi = np.log(pi)
        _, logp = dependent_label_logmass(logliks, log_pi, alpha, K, combos)
        L = combos[sample_categorical(logp, shared)].T.copy()
        tau = np.array([(L[i] == L[j]).sum() for i, j in pairs])
        alpha = np.atleast_1d(sample_truncated_beta(a + tau, b + N - tau, 1.0 / K, shared, counter=counter))
        for m in range(M):
            pi[m] = shared.dirichlet(beta0 + np.bincount(L[m], minlength=K))
            pi[m] /= pi[m].sum()
        trace_alpha[it - 1] = alpha
        trace_pi[it - 1] = pi
        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            out_L[s], out_alpha[s], out_pi[s] = L, alpha, pi
            s += 1
    return PosteriorDraws(out_L, None, out_alpha, out_pi, trace_alpha, trace_pi, K,
                          diagnostics=counter)


# -- scoring -----------------------------------------------------------------

def best_permutation(estimated, truth, K: int | None = None) -> np.ndarray:
    """Relabeling sigma (as an array, sigma[est_label] = truth_label) that
    maximizes agreement.  Exhaustive for K <= 8, Hungarian otherwise."""
    estimated = np.asarray(estimated, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if K is None:
        K = int(max(estimated.max(), truth.max())) + 1
    W = np.zeros((K, K), dtype=np.int64)
    np.add.at(W, (estimated, truth), 1)
    if K <= 8:
        perms = np.array(list(itertools.permutations(range(K))), dtype=np.int64)
        scores = W[np.arange(K)[None, :], perms].sum(axis=1)
        return perms[int(np.argmax(scores))]
    rows, cols = linear_sum_assignment(W, maximize=True)
    sigma = np.empty(K, dtype=np.int64)
    sigma[rows] = cols
    return sigma


def relative_error(estimated, truth, K: int | None = None) -> float:
    """Fraction of mismatched labels after per-source best relabeling.

    ``truth`` is M x N; ``estimated`` is M x N, or a single length-N
    clustering scored against every source (joint clustering).
    """
    truth = np.atleast_2d(np.asarray(truth, dtype=np.int64))
    est = np.asarray(estimated, dtype=np.int64)
    if est.ndim == 1:
        est = np.broadcast_to(est, truth.shape)
    if est.shape != truth.shape:
        raise ValueError(f"shape mismatch: estimated {est.shape} vs truth {truth.shape}")
    if K is None:
        K = int(max(est.max(), truth.max())) + 1
    wrong = 0
    for e, t in zip(est, truth):
        sigma = best_permutation(e, t, K)
        wrong += int(np.sum(sigma[e] != t))
    return wrong / truth.size
