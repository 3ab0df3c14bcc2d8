"""POCS-based clustering.

Every data point is treated as a singleton convex set. A cluster prototype
is projected onto all of its member points at once, and the projections
are combined with weights proportional to how far each member lies from
the prototype::

    w_i = |x - d_i| / sum_p |x - d_p|
    x  <- x + sum_i w_i (d_i - x)

Because the weights sum to one, the update lands on the distance-weighted
mean of the members.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .baselines import kmeanspp_init
from .core import AlgoConfig, ClusterModel, NearestTracker, as_points, reseed_empty
from .errors import ContractError


def _members(members) -> np.ndarray:
    D = np.asarray(members, dtype=float)
    if D.ndim == 1:
        D = D[:, None]
    if D.shape[0] == 0:
        raise ContractError("a cluster update needs at least one member")
    return D


def pocs_weights(prototype, members) -> np.ndarray:
    """Projection weights of `members` relative to `prototype`.

    If every member coincides with the prototype the distance ratios are
    undefined and uniform weights are returned instead.
    """
    D = _members(members)
    x = np.asarray(prototype, dtype=float).reshape(-1)
    dist = np.sqrt(np.sum((D - x) ** 2, axis=1))
    total = dist.sum()
    if total == 0:
        return np.full(D.shape[0], 1.0 / D.shape[0])
    return dist / total


def pocs_update_prototype(prototype, members) -> np.ndarray:
    """One parallel-projection step of a prototype onto its member points."""
    D = _members(members)
    x = np.asarray(prototype, dtype=float).reshape(-1)
    w = pocs_weights(x, D)
    return x + w @ (D - x)


def _member_distances(X, P, labels) -> np.ndarray:
    return np.sqrt(np.sum((X - P[labels]) ** 2, axis=1))


def _objective_terms(dist, labels, k):
    # per cluster: sum_i w_i |x - d_i|^2 = sum_i |x - d_i|^3 / sum_p |x - d_p|
    total = np.bincount(labels, dist, minlength=k)
    cubes = np.bincount(labels, dist**3, minlength=k)
    safe = np.where(total > 0, total, 1.0)
    return np.where(total > 0, cubes / safe, 0.0), total


def pocs_objective(model: ClusterModel, data) -> float:
    """Weighted sum of squared prototype-to-member distances over all clusters."""
    X = as_points(data)
    if model.labels.shape[0] != X.shape[0]:
        raise ContractError("model labels do not match the dataset size")
    dist = _member_distances(X, model.prototypes, model.labels)
    terms, _ = _objective_terms(dist, model.labels, model.k)
    return float(terms.sum())


def pocs_step(X: np.ndarray, P: np.ndarray, labels: np.ndarray, dist=None) -> np.ndarray:
    """Update every non-empty cluster's prototype at once.

    `dist` may carry the precomputed distance of each point to its own
    prototype. Empty clusters keep their prototype; the caller decides how
    to reseed.
    """
    k = P.shape[0]
    if dist is None:
        dist = _member_distances(X, P, labels)
    total = np.bincount(labels, dist, minlength=k)
    diff = X - P[labels]
    moved = np.stack(
        [np.bincount(labels, dist * diff[:, c], minlength=k) for c in range(X.shape[1])], axis=1
    )
    out = P.copy()
    live = total > 0
    out[live] = P[live] + moved[live] / total[live, None]
    return out


def fit_pocs(data, config: AlgoConfig) -> ClusterModel:
    """Cluster `data` with the POCS-based algorithm.

    Prototypes start from k-means++ seeds. Each iteration updates every
    cluster's prototype by parallel projection onto its members, reseeds
    empty clusters on the farthest point, and reassigns points to their
    nearest prototype (unless ``config.reassign`` is off). The run stops
    once no prototype moves more than ``config.tol`` (max-norm) and no
    label changes, or after ``config.iterations`` iterations.

    ``history`` records the objective before each update.
    """
    X = as_points(data)
    config = replace(config, algo="pocs")
    config.validate(X.shape[0])
    k = config.k
    P = kmeanspp_init(X, k, config.seed)
    tracker = NearestTracker(X, P)
    labels = tracker.labels.copy()
    dist = np.sqrt(tracker.d2)
    history = []
    converged = False
    it = 0
    for it in range(1, config.iterations + 1):
        terms, _ = _objective_terms(dist, labels, k)
        history.append(float(terms.sum()))
        P_new = pocs_step(X, P, labels, dist)
        reseed_empty(X, P_new, labels)
        shift = np.max(np.abs(P_new - P))
        P = P_new
        if config.reassign:
            new_labels, d2 = tracker.update(P)
            same = np.array_equal(new_labels, labels)
            labels, dist = new_labels, np.sqrt(d2)
        else:
            same = True
            dist = _member_distances(X, P, labels)
        if shift <= config.tol and same:
            converged = True
            break
    model = ClusterModel(P, labels, it, converged, 0.0, history)
    model.objective = pocs_objective(model, X)
    return model
