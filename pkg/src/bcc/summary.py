"""Posterior summaries: Dahl point clusterings, adherence statistics and the
choice of K by maximal mean adjusted adherence."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .model import check_alpha
from .sampler import ChainConfig, PosteriorDraws, derive_seed, run_chain, with_model

_CHUNK = 256


def _one_hot_block(labels: np.ndarray, K: int) -> np.ndarray:
    """(B, N) labels -> (N, B*K) float one-hot block."""
    B, N = labels.shape
    Z = np.zeros((N, B, K))
    Z[np.arange(N)[:, None], np.arange(B)[None, :], labels.T] = 1.0
    return Z.reshape(N, B * K)


def _co_counts(draws: np.ndarray, K: int) -> np.ndarray:
    B, N = draws.shape
    counts = np.zeros((N, N))
    for s in range(0, B, _CHUNK):
        Z = _one_hot_block(draws[s:s + _CHUNK], K)
        counts += Z @ Z.T
    return counts


def coincidence_matrix(draws) -> np.ndarray:
    """Fraction of draws in which each pair of objects shares a label."""
    draws = np.atleast_2d(np.asarray(draws, dtype=np.int64))
    K = int(draws.max()) + 1
    return _co_counts(draws, K) / draws.shape[0]


def dahl_losses(draws) -> np.ndarray:
    """B^2-scaled squared loss sum_{i<j} (delta_ij - P_ij)^2 for every draw.

    Counts are integers held exactly in float64, so equal partitions get
    exactly equal losses.
    """
    draws = np.atleast_2d(np.asarray(draws, dtype=np.int64))
    B, N = draws.shape
    K = int(draws.max()) + 1
    counts = _co_counts(draws, K)
    total_sq = float(np.sum(counts * counts))
    losses = np.empty(B)
    rows = np.arange(N)
    for s in range(0, B, _CHUNK):
        block = draws[s:s + _CHUNK]
        Z = _one_hot_block(block, K)
        PZ = (counts @ Z).reshape(N, block.shape[0], K)
        cross = PZ[rows[:, None], np.arange(block.shape[0])[None, :], block.T].sum(axis=0)
        sizes = np.stack([np.bincount(d, minlength=K) for d in block]).astype(float)
        losses[s:s + block.shape[0]] = 0.5 * (B * B * (sizes ** 2).sum(axis=1) - 2.0 * B * cross + total_sq)
    return losses


def dahl_point_estimate(draws) -> np.ndarray:
    """Draw closest (squared loss) to the posterior coincidence matrix;
    ties go to the earliest draw."""
    draws = np.atleast_2d(np.asarray(draws, dtype=np.int64))
    return draws[int(np.argmin(dahl_losses(draws)))].copy()


def adjusted_adherence(alpha, K: int):
    """(K alpha - 1) / (K - 1), mapping [1/K, 1] onto [0, 1]."""
    a = check_alpha(alpha, K)
    out = (K * a - 1.0) / (K - 1.0)
    return float(out) if np.ndim(out) == 0 else out


def mean_adjusted_adherence(draws: PosteriorDraws) -> tuple[float, tuple[float, float]]:
    per_draw = adjusted_adherence(draws.alpha, draws.K).mean(axis=1)
    lo, hi = np.percentile(per_draw, [2.5, 97.5])
    return float(per_draw.mean()), (float(lo), float(hi))


def alpha_summary(draws: PosteriorDraws):
    """Posterior mean and 95% percentile interval of each alpha_m."""
    lo, hi = np.percentile(draws.alpha, [2.5, 97.5], axis=0)
    return draws.alpha.mean(axis=0), lo, hi


def matching_matrix(a, b, Ka: int | None = None, Kb: int | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.shape != b.shape:
        raise ValueError(f"clusterings differ in length: {a.shape[0]} vs {b.shape[0]}")
    Ka = int(a.max()) + 1 if Ka is None else Ka
    Kb = int(b.max()) + 1 if Kb is None else Kb
    out = np.zeros((Ka, Kb), dtype=np.int64)
    np.add.at(out, (a, b), 1)
    return out


@dataclass
class ClusteringResult:
    C: np.ndarray | None
    L: np.ndarray
    alpha_mean: np.ndarray | None
    alpha_ci: np.ndarray | None
    mean_adjusted: tuple | None
    pi_mean: np.ndarray
    matching: list | None


def summarize(draws: PosteriorDraws) -> ClusteringResult:
    """Dahl estimates for C and every L_m plus adherence and weight summaries."""
    M = draws.L.shape[1]
    L = np.vstack([dahl_point_estimate(draws.L[:, m]) for m in range(M)])
    if draws.C is None:
        return ClusteringResult(None, L, None, None, None, draws.pi.mean(axis=0), None)
    C = dahl_point_estimate(draws.C)
    mean, lo, hi = alpha_summary(draws)
    K = draws.K
    matching = [matching_matrix(C, L[m], K, K) for m in range(M)]
    return ClusteringResult(C, L, mean, np.vstack([lo, hi]).T, mean_adjusted_adherence(draws),
                            draws.pi.mean(axis=0), matching)


def _fit_for_k(args):
    data, config, K, priors = args
    cfg = replace(with_model(config, K=K), seed=derive_seed(config.seed, K))
    draws = run_chain(data, cfg, priors=priors)
    point, (lo, hi) = mean_adjusted_adherence(draws)
    return {"K": K, "mean_adjusted_adherence": point, "ci_low": lo, "ci_high": hi}


def select_K(data, k_range, config: ChainConfig, n_jobs: int = 1, priors=None):
    """Fit one chain per candidate K and pick the K with the highest mean
    adjusted adherence.  Per-K seeds are derived from ``config.seed``.

    Returns ``(K_star, table)`` where ``table`` is a list of dicts ordered as
    ``k_range``.
    """
    ks = [int(k) for k in k_range]
    if not ks or min(ks) < 2:
        raise ValueError("k_range must be a nonempty list of integers >= 2")
    cfg = replace(config, keep_theta=False)
    jobs = [(data, cfg, K, priors) for K in ks]
    if n_jobs > 1:
        with ProcessPoolExecutor(n_jobs) as ex:
            table = list(ex.map(_fit_for_k, jobs))
    else:
        table = [_fit_for_k(j) for j in jobs]
    best = int(np.argmax([row["mean_adjusted_adherence"] for row in table]))
    return table[best]["K"], table
