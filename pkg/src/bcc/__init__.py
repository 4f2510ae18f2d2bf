"""Bayesian consensus clustering for multi-source data."""
from .dataset import MultiSourceDataset
from .exceptions import BCCError, ConfigurationError, DataError, DegenerateDistributionError
from .model import ModelConfig
from .normal_gamma import NormalGammaParams, default_hyperparams, posterior_update
from .sampler import ChainConfig, ChainState, InitStrategy, PosteriorDraws, initialize, run_chain, step
from .summary import ClusteringResult, dahl_point_estimate, select_K, summarize

__version__ = "0.1.0"

__all__ = [
    "BCCError", "ChainConfig", "ChainState", "ClusteringResult", "ConfigurationError",
    "DataError", "DegenerateDistributionError", "InitStrategy", "ModelConfig",
    "MultiSourceDataset", "NormalGammaParams", "PosteriorDraws", "dahl_point_estimate",
    "default_hyperparams", "initialize", "posterior_update", "run_chain", "select_K",
    "step", "summarize",
]
