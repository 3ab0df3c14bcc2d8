"""POCS-based clustering with K-Means and Fuzzy C-Means baselines."""

from .baselines import FuzzyModel, fit_fcm, fit_kmeans, harden, kmeanspp_init
from .core import AlgoConfig, ClusterModel, Dataset, assign_points
from .data import load_dataset, make_blobs, normalize
from .errors import ConfigError, ContractError, ParseError
from .evaluation import clustering_error, run_experiment
from .pocs import fit_pocs, pocs_objective, pocs_update_prototype, pocs_weights

__all__ = [
    "AlgoConfig", "ClusterModel", "ConfigError", "ContractError", "Dataset", "FuzzyModel",
    "ParseError", "assign_points", "clustering_error", "fit_fcm", "fit_kmeans", "fit_pocs",
    "harden", "kmeanspp_init", "load_dataset", "make_blobs", "normalize", "pocs_objective",
    "pocs_update_prototype", "pocs_weights", "run_experiment",
]
