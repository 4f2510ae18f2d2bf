"""Simulation studies on two-cluster synthetic data.

Every study takes a ``ChainConfig`` whose ``seed`` is the master seed.  Rep
``r`` generates its data from ``derive_seed(seed, r, 0)`` and fits method
``j`` with ``derive_seed(seed, r, j)``, so records do not depend on the order
(or process) in which reps run.  Records are returned sorted by rep.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from functools import partial

import numpy as np

from .baselines import dependent_sampler, joint_sampler, relative_error, separate_clusterings
from .dataset import MultiSourceDataset
from .model import source_inclusion_probs
from .sampler import ChainConfig, derive_seed, run_chain, with_model
from .summary import alpha_summary, dahl_point_estimate

STUDY_CONFIG = ChainConfig(iterations=1200, burn_in=200, keep_theta=False)


def generate_two_cluster_data(alpha: float, M: int, N: int, mu_sep: float, rng: np.random.Generator):
    """Overall clusters are the two halves of the objects; each source label
    keeps the overall label with probability ``alpha``; X ~ N(+mu_sep, 1) for
    label 0 and N(-mu_sep, 1) for label 1.

    Returns ``(dataset, C, L)`` with 0-based labels, ``L`` of shape (M, N).
    """
    if not 0.5 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0.5, 1], got {alpha}")
    if N < 2 or N % 2:
        raise ValueError("N must be a positive even number")
    if M < 1 or not mu_sep > 0:
        raise ValueError("need M >= 1 and mu_sep > 0")
    C = np.repeat([0, 1], N // 2)
    keep = rng.random((M, N)) < alpha
    L = np.where(keep, C, 1 - C)
    means = np.where(L == 0, mu_sep, -mu_sep)
    X = means + rng.standard_normal((M, N))
    return MultiSourceDataset([X[m][:, None] for m in range(M)]), C, L


def check_generated(data: MultiSourceDataset, C, L, alpha: float, mu_sep: float, z: float = 5.0) -> None:
    """Cheap distributional sanity checks on generated data (``z`` SEs)."""
    agree = float(np.mean(L == C[None, :]))
    se = max(np.sqrt(alpha * (1 - alpha) / L.size), 1.0 / L.size)
    if abs(agree - alpha) > z * se + 1e-12:
        raise AssertionError(f"adherence frequency {agree:.4f} far from alpha={alpha:.4f}")
    X = np.vstack([s[:, 0] for s in data.sources])
    for label, mean in ((0, mu_sep), (1, -mu_sep)):
        vals = X[L == label]
        if vals.size and abs(vals.mean() - mean) > z / np.sqrt(vals.size):
            raise AssertionError(f"component mean {vals.mean():.3f} far from {mean}")


def _map(fn, items, n_jobs: int):
    if n_jobs > 1:
        with ProcessPoolExecutor(n_jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def _draw_rep(seed: int, rep: int, M: int, N: int, mu_sep: float, alpha=None):
    rng = np.random.default_rng(derive_seed(seed, rep, 0))
    true_alpha = float(rng.uniform(0.5, 1.0)) if alpha is None else float(alpha)
    data, C, L = generate_two_cluster_data(true_alpha, M, N, mu_sep, rng)
    check_generated(data, C, L, true_alpha, mu_sep)
    return true_alpha, data, C, L


def _bcc_config(config: ChainConfig, seed: int, prior=(1.0, 1.0)) -> ChainConfig:
    cfg = with_model(config, K=2, equal_alpha=True, N=None, M=None)
    return replace(cfg, seed=seed, alpha_prior=tuple(prior))


def _alpha_rep(rep, config, M, N, mu_sep, prior=(1.0, 1.0)):
    true_alpha, data, _, _ = _draw_rep(config.seed, rep, M, N, mu_sep)
    draws = run_chain(data, _bcc_config(config, derive_seed(config.seed, rep, 1), prior))
    mean, lo, hi = alpha_summary(draws)
    return {"rep": rep, "true_alpha": true_alpha, "alpha_hat": float(mean[0]),
            "ci_low": float(lo[0]), "ci_high": float(hi[0]),
            "covered": int(lo[0] <= true_alpha <= hi[0])}


def alpha_recovery_study(reps: int = 100, config: ChainConfig = STUDY_CONFIG, M: int = 2,
                         N: int = 200, mu_sep: float = 1.5, n_jobs: int = 1) -> list[dict]:
    """alpha ~ U(0.5, 1) per rep; fit the equal-adherence model under a
    uniform TBeta(1, 1, 1/2) prior; record posterior mean and 95% interval."""
    fn = partial(_alpha_rep, config=config, M=M, N=N, mu_sep=mu_sep)
    return _map(fn, range(reps), n_jobs)


def _error_rep(rep, config, M, N, mu_sep):
    true_alpha, data, _, L = _draw_rep(config.seed, rep, M, N, mu_sep)
    base = with_model(config, K=2, equal_alpha=False, N=None, M=None)
    base = replace(base, alpha_prior=(1.0, 1.0), beta0=1.0)
    sep = separate_clusterings(data, replace(base, seed=derive_seed(config.seed, rep, 1)))
    sep_hat = np.vstack([dahl_point_estimate(d.L[:, 0]) for d in sep])
    joint = joint_sampler(data, replace(base, seed=derive_seed(config.seed, rep, 2)))
    joint_hat = dahl_point_estimate(joint.L[:, 0])
    dep = dependent_sampler(data, replace(base, seed=derive_seed(config.seed, rep, 3)))
    dep_hat = np.vstack([dahl_point_estimate(dep.L[:, m]) for m in range(M)])
    bcc = run_chain(data, _bcc_config(base, derive_seed(config.seed, rep, 4)))
    bcc_hat = np.vstack([dahl_point_estimate(bcc.L[:, m]) for m in range(M)])
    return {"rep": rep, "alpha": true_alpha,
            "err_separate": relative_error(sep_hat, L, 2),
            "err_joint": relative_error(joint_hat, L, 2),
            "err_dependent": relative_error(dep_hat, L, 2),
            "err_bcc": relative_error(bcc_hat, L, 2)}


def error_comparison_study(M: int = 2, reps: int = 100, config: ChainConfig = STUDY_CONFIG,
                           N: int = 200, mu_sep: float = 1.0, n_jobs: int = 1) -> list[dict]:
    """Relative clustering error of separate, joint, dependent and consensus
    clustering against the generating source labels."""
    if M not in (2, 3):
        raise ValueError("the comparison study is defined for M = 2 or 3")
    fn = partial(_error_rep, config=config, M=M, N=N, mu_sep=mu_sep)
    return _map(fn, range(reps), n_jobs)


def _prior_cell(item, config, M, N, mu_sep):
    (a, b), rep = item
    rec = _alpha_rep(rep, config, M, N, mu_sep, prior=(a, b))
    return {"a": a, "b": b, "rep": rep, "true_alpha": rec["true_alpha"],
            "alpha_hat": rec["alpha_hat"], "ci_low": rec["ci_low"], "ci_high": rec["ci_high"]}


def prior_sensitivity_study(prior_grid, reps: int = 100, config: ChainConfig = STUDY_CONFIG,
                            M: int = 2, N: int = 200, mu_sep: float = 1.5, n_jobs: int = 1) -> list[dict]:
    """Repeat the alpha-recovery fit under TBeta(a, b, 1/2) priors.

    Rep ``r`` sees the same dataset in every cell (and in
    :func:`alpha_recovery_study` with the same config), so cells are paired.
    """
    grid = [(float(a), float(b)) for a, b in prior_grid]
    if any(a <= 0 or b <= 0 for a, b in grid):
        raise ValueError("prior parameters must be positive")
    items = [(cell, rep) for cell in grid for rep in range(reps)]
    fn = partial(_prior_cell, config=config, M=M, N=N, mu_sep=mu_sep)
    return _map(fn, items, n_jobs)


def inclusion_probability_table(pi, alphas, K: int | None = None) -> np.ndarray:
    """K x len(alphas) table of induced source-cluster probabilities."""
    pi = np.asarray(pi, dtype=float)
    if K is not None and pi.shape != (K,):
        raise ValueError(f"pi must have length K={K}")
    return np.column_stack([source_inclusion_probs(pi, a) for a in alphas])
