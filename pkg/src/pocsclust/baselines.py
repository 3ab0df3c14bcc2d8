"""K-Means (Lloyd) with k-means++ seeding, and Fuzzy C-Means."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import AlgoConfig, ClusterModel, NearestTracker, as_points, reseed_empty, sq_distances
from .errors import ConfigError, ContractError


def kmeanspp_init(data, k: int, seed: int) -> np.ndarray:
    """Pick `k` initial prototypes from the data with D^2 sampling.

    The first center is drawn uniformly; each further center is drawn with
    probability proportional to its squared distance from the closest
    center chosen so far. Uses a PCG64 generator seeded with `seed`, so the
    result is reproducible across platforms.
    """
    X = as_points(data)
    n_distinct = np.unique(X, axis=0).shape[0]
    if k < 1 or k > n_distinct:
        raise ConfigError(f"k={k} must be between 1 and the number of distinct points ({n_distinct})")
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(X.shape[0]))]
    d2 = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    for _ in range(1, k):
        cum = np.cumsum(d2)
        # side="right" skips zero-weight entries, so an existing center is never redrawn
        idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
        idx = min(idx, X.shape[0] - 1)
        chosen.append(idx)
        d2 = np.minimum(d2, np.sum((X - X[idx]) ** 2, axis=1))
    return X[chosen].copy()


def fit_kmeans(data, config: AlgoConfig) -> ClusterModel:
    """Lloyd iterations from k-means++ seeds.

    Stops as soon as an update leaves every assignment unchanged, or after
    ``config.iterations`` updates. ``history`` holds the within-cluster sum
    of squares after each assignment.
    """
    X = as_points(data)
    config = replace(config, algo="kmeans")
    config.validate(X.shape[0])
    k = config.k
    P = kmeanspp_init(X, k, config.seed)
    tracker = NearestTracker(X, P)
    labels, d2 = tracker.labels.copy(), tracker.d2
    history = [float(d2.sum())]
    converged = False
    it = 0
    for it in range(1, config.iterations + 1):
        counts = np.bincount(labels, minlength=k)
        sums = np.stack([np.bincount(labels, X[:, c], minlength=k) for c in range(X.shape[1])], axis=1)
        filled = counts > 0
        P[filled] = sums[filled] / counts[filled, None]
        reseed_empty(X, P, labels)
        new_labels, d2 = tracker.update(P)
        history.append(float(d2.sum()))
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels
    return ClusterModel(P, labels, it, converged, history[-1], history)


@dataclass
class FuzzyModel:
    prototypes: np.ndarray
    membership: np.ndarray
    m: float
    iterations: int
    converged: bool
    objective: float
    history: list = field(default_factory=list)


def fcm_membership(X: np.ndarray, C: np.ndarray, m: float) -> np.ndarray:
    """Membership matrix ``u_ij = 1 / sum_l (|x_i - c_j| / |x_i - c_l|)^(2/(m-1))``.

    A point that coincides with a center belongs to it fully (lowest index
    if several centers coincide).
    """
    d2 = sq_distances(X, C)
    zero = d2 == 0
    hit = zero.any(axis=1)
    # divide by the row minimum first so the negative power cannot overflow
    ratio = d2[~hit] / d2[~hit].min(axis=1, keepdims=True)
    inv = ratio ** (-1.0 / (m - 1.0))
    U = np.zeros_like(d2)
    U[~hit] = inv / inv.sum(axis=1, keepdims=True)
    rows = np.flatnonzero(hit)
    U[rows, np.argmax(zero[rows], axis=1)] = 1.0
    return U


def _fcm_objective(X, C, U, m) -> float:
    return float(np.sum(U**m * sq_distances(X, C)))


def fit_fcm(data, config: AlgoConfig, m: float | None = None) -> FuzzyModel:
    """Fuzzy C-Means started from k-means++ centers.

    Alternates the membership update and the center update
    ``c_j = sum_i u_ij^m x_i / sum_i u_ij^m`` until no center moves more
    than ``config.tol`` (max-norm) or ``config.iterations`` updates have run.
    The returned membership matrix belongs to the returned centers.
    """
    X = as_points(data)
    if m is None:
        m = config.m
    config = replace(config, algo="fcm", m=m)
    config.validate(X.shape[0])
    C = kmeanspp_init(X, config.k, config.seed)
    U = fcm_membership(X, C, m)
    history = [_fcm_objective(X, C, U, m)]
    converged = False
    it = 0
    for it in range(1, config.iterations + 1):
        W = U**m
        mass = W.sum(axis=0)
        C_new = C.copy()
        live = mass > 0
        C_new[live] = (W.T[live] @ X) / mass[live, None]
        shift = np.max(np.abs(C_new - C))
        C = C_new
        U = fcm_membership(X, C, m)
        history.append(_fcm_objective(X, C, U, m))
        if shift <= config.tol:
            converged = True
            break
    return FuzzyModel(C, U, m, it, converged, history[-1], history)


def harden(model: FuzzyModel, data=None) -> ClusterModel:
    """Hard labels by per-row argmax of the membership (ties to the lowest index)."""
    U = model.membership
    if data is not None and as_points(data).shape[0] != U.shape[0]:
        raise ContractError("membership rows do not match the dataset size")
    labels = np.argmax(U, axis=1)
    return ClusterModel(
        model.prototypes.copy(), labels, model.iterations, model.converged,
        model.objective, list(model.history), U,
    )
