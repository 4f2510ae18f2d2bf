"""Closed-form probability kernels of the consensus clustering model.

Labels are 0-based everywhere in the Python API (``0 <= label < K``); the
1-based convention only appears in files written by :mod:`bcc.io`.

The dependence between a source label ``l`` and the overall label ``c`` is

    nu(l, c, alpha) = alpha                 if l == c
                    = (1 - alpha) / (K - 1)  otherwise

with ``alpha`` in ``[1/K, 1]``.  Every kernel has a ``log_`` twin; the
samplers only use the log forms.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .exceptions import ConfigurationError, DegenerateDistributionError

_ALPHA_TOL = 1e-12


@dataclass(frozen=True)
class ModelConfig:
    """Model dimensions.

    ``N`` and ``M`` may be left as ``None`` and filled in from data with
    :meth:`bind`.
    """

    K: int
    equal_alpha: bool = False
    N: int | None = None
    M: int | None = None

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 2:
            raise ConfigurationError(f"K must be an integer >= 2, got {self.K}")
        if self.N is not None and self.N < 1:
            raise ConfigurationError(f"N must be >= 1, got {self.N}")
        if self.M is not None and self.M < 1:
            raise ConfigurationError(f"M must be >= 1, got {self.M}")

    def bind(self, N: int, M: int) -> "ModelConfig":
        if self.N is not None and self.N != N:
            raise ConfigurationError(f"config has N={self.N} but data has N={N}")
        if self.M is not None and self.M != M:
            raise ConfigurationError(f"config has M={self.M} but data has M={M}")
        if self.K > N:
            raise ConfigurationError(f"K={self.K} exceeds the number of objects N={N}")
        return ModelConfig(self.K, self.equal_alpha, N, M)


# -- validation --------------------------------------------------------------

def check_alpha(alpha, K: int) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if np.any(a < 1.0 / K - _ALPHA_TOL) or np.any(a > 1.0 + _ALPHA_TOL) or np.any(np.isnan(a)):
        raise ValueError(f"adherence must lie in [1/K, 1] = [{1.0 / K:.6g}, 1], got {alpha}")
    return np.clip(a, 1.0 / K, 1.0)


def check_labels(labels, K: int) -> np.ndarray:
    lab = np.asarray(labels)
    if lab.size and (not np.issubdtype(lab.dtype, np.integer) or lab.min() < 0 or lab.max() >= K):
        raise ValueError(f"labels must be integers in 0..{K - 1}")
    return lab.astype(np.int64, copy=False)


def check_weights(pi, K: int | None = None) -> np.ndarray:
    p = np.asarray(pi, dtype=float)
    if p.ndim != 1 or (K is not None and p.shape[0] != K):
        raise ValueError(f"mixture weights must be a length-{K} vector")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("mixture weights must be nonnegative and sum to 1")
    return p


def adherence_ratio(alpha: float, K: int) -> float:
    """U = (K-1) alpha / (1 - alpha); infinite at alpha = 1.

    For K = 2 this equals alpha / (1 - alpha), the form used when comparing
    with the pairwise-dependence (MDI) model.
    """
    alpha = float(check_alpha(alpha, K))
    if alpha == 1.0:
        return np.inf
    return (K - 1) * alpha / (1.0 - alpha)


# -- dependence function -----------------------------------------------------

def log_nu_pair(alpha, K: int):
    """Return ``(log nu_same, log nu_diff)``; broadcasts over ``alpha``."""
    alpha = check_alpha(alpha, K)
    with np.errstate(divide="ignore"):
        return np.log(alpha), np.log1p(-alpha) - np.log(K - 1)


def nu(l: int, c: int, alpha: float, K: int) -> float:
    check_labels([l, c], K)
    alpha = float(check_alpha(alpha, K))
    return alpha if l == c else (1.0 - alpha) / (K - 1)


def log_nu(l: int, c: int, alpha: float, K: int) -> float:
    check_labels([l, c], K)
    same, diff = log_nu_pair(alpha, K)
    return float(same if l == c else diff)


# -- induced source-cluster probabilities -------------------------------------

def source_inclusion_probs(pi, alpha: float) -> np.ndarray:
    """P(L_mn = k | pi) for every k."""
    pi = check_weights(pi)
    K = pi.shape[0]
    alpha = float(check_alpha(alpha, K))
    return pi * alpha + (1.0 - pi) * (1.0 - alpha) / (K - 1)


def source_inclusion_prob(k: int, pi, alpha: float, K: int) -> float:
    pi = check_weights(pi, K)
    check_labels([k], K)
    return float(source_inclusion_probs(pi, alpha)[k])


def log_source_inclusion_prob(k: int, pi, alpha: float, K: int) -> float:
    with np.errstate(divide="ignore"):
        return float(np.log(source_inclusion_prob(k, pi, alpha, K)))


# -- conditional for the overall label ---------------------------------------

def log_overall_conditional(l_row, pi, alphas, K: int) -> np.ndarray:
    """Normalized log P(C_n = k | L_1n..L_Mn, pi, alpha) for all k."""
    l_row = check_labels(l_row, K)
    pi = check_weights(pi, K)
    alphas = np.broadcast_to(check_alpha(alphas, K), l_row.shape)
    same, diff = log_nu_pair(alphas, K)
    with np.errstate(divide="ignore"):
        logw = np.log(pi).copy()
    ks = np.arange(K)
    for m, l in enumerate(l_row):
        logw += np.where(ks == l, same[m], diff[m])
    total = logsumexp(logw)
    if not np.isfinite(total):
        raise DegenerateDistributionError("overall-label conditional has zero mass")
    return logw - total


def overall_conditional(l_row, pi, alphas, K: int) -> np.ndarray:
    return np.exp(log_overall_conditional(l_row, pi, alphas, K))


# -- marginal forms ------------------------------------------------------------

def log_joint_source_marginal(k_vec, pi, alphas, K: int) -> float:
    """log sum_k pi_k prod_m nu(k_m, k, alpha_m) (unnormalized)."""
    k_vec = check_labels(k_vec, K)
    pi = check_weights(pi, K)
    alphas = np.broadcast_to(check_alpha(alphas, K), k_vec.shape)
    same, diff = log_nu_pair(alphas, K)
    ks = np.arange(K)[:, None]
    with np.errstate(divide="ignore"):
        terms = np.log(pi) + np.where(ks == k_vec[None, :], same, diff).sum(axis=1)
    return float(logsumexp(terms))


def joint_source_marginal(k_vec, pi, alphas, K: int) -> float:
    return float(np.exp(log_joint_source_marginal(k_vec, pi, alphas, K)))


def log_equal_alpha_marginal(k_vec, pi, alpha: float, K: int, limit: bool = False) -> float:
    """log sum_k pi_k U^{t_k}, t_k = #{m : k_m = k}.

    At ``alpha == 1`` U is infinite; with ``limit=True`` the masses are
    rescaled by U^{-M}, which leaves pi_k on constant ``k_vec`` and zero
    elsewhere.
    """
    k_vec = check_labels(k_vec, K)
    pi = check_weights(pi, K)
    alpha = float(check_alpha(alpha, K))
    t = np.bincount(k_vec, minlength=K)
    with np.errstate(divide="ignore"):
        log_pi = np.log(pi)
        if alpha == 1.0:
            if not limit:
                raise ValueError("alpha = 1 makes U infinite; pass limit=True")
            M = k_vec.shape[0]
            return float(logsumexp(np.where(t == M, log_pi, -np.inf)))
        log_u = np.log(K - 1) + np.log(alpha) - np.log1p(-alpha)
        return float(logsumexp(log_pi + t * log_u))


def equal_alpha_marginal(k_vec, pi, alpha: float, K: int, limit: bool = False) -> float:
    return float(np.exp(log_equal_alpha_marginal(k_vec, pi, alpha, K, limit)))


def log_mdi_pairwise_mass(k_vec, pi_tilde, phi) -> float:
    """log of prod_m pi~_{m,k_m} * prod_{i<j, k_i = k_j} (1 + phi_ij)."""
    pi_tilde = np.asarray(pi_tilde, dtype=float)
    if pi_tilde.ndim != 2:
        raise ValueError("pi_tilde must be an M x K matrix")
    M, K = pi_tilde.shape
    for row in pi_tilde:
        check_weights(row, K)
    k_vec = check_labels(k_vec, K)
    phi = np.broadcast_to(np.asarray(phi, dtype=float), (M, M))
    if np.any(phi < 0):
        raise ValueError("association parameters must be nonnegative")
    with np.errstate(divide="ignore"):
        out = float(np.log(pi_tilde[np.arange(M), k_vec]).sum())
    for i, j in itertools.combinations(range(M), 2):
        if k_vec[i] == k_vec[j]:
            out += np.log1p(phi[i, j])
    return out


def mdi_pairwise_mass(k_vec, pi_tilde, phi) -> float:
    return float(np.exp(log_mdi_pairwise_mass(k_vec, pi_tilde, phi)))


def bcc_to_mdi_substitution(pi1: float, U: float) -> tuple[float, float]:
    """Map (pi_1, U) of the two-source, two-cluster equal-adherence model to
    the MDI parameters (phi, pi~_1) giving proportional joint label masses.

    ``U`` is ``alpha / (1 - alpha)``, which is :func:`adherence_ratio` at K=2.
    """
    if not 0.0 < pi1 < 1.0:
        raise ValueError(f"pi1 must lie in (0, 1), got {pi1}")
    if not U >= 1.0:
        raise ValueError(f"U must be >= 1, got {U}")
    q = 1.0 - pi1
    r_same1 = pi1 * U + q / U
    r_same2 = q * U + pi1 / U
    phi = np.sqrt(r_same2 * r_same1) - 1.0
    pt1 = np.sqrt(r_same1) / (np.sqrt(r_same2) + np.sqrt(r_same1))
    return float(phi), float(pt1)
