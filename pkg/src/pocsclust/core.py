"""Shared clustering types and the nearest-prototype machinery."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, ContractError

ALGORITHMS = ("pocs", "kmeans", "fcm")
DEFAULT_MAX_ITER = {"pocs": 100, "kmeans": 300, "fcm": 300}
EMPTY_CLUSTER_POLICIES = ("reseed_farthest",)

# rows per block when forming the n x k x d difference tensor
_CHUNK = 4096


@dataclass(frozen=True)
class Dataset:
    """An immutable ordered collection of points of one dimension."""

    points: np.ndarray
    name: str = ""

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ContractError("a dataset needs at least one point of dimension >= 1")
        if not np.all(np.isfinite(pts)):
            raise ContractError("dataset contains non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n_points


@dataclass(frozen=True)
class AlgoConfig:
    """Settings for one fit.

    ``max_iter=None`` picks the per-algorithm default (100 for POCS, 300 for
    K-Means and FCM). ``reassign=False`` keeps the initial assignment for
    the whole POCS run.
    """

    k: int
    algo: str = "pocs"
    seed: int = 0
    max_iter: Optional[int] = None
    tol: float = 1e-6
    m: float = 2.0
    reassign: bool = True
    empty_cluster_policy: str = "reseed_farthest"

    @property
    def iterations(self) -> int:
        return self.max_iter if self.max_iter is not None else DEFAULT_MAX_ITER[self.algo]

    def validate(self, n_points: int | None = None) -> None:
        if self.algo not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algo!r}")
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if n_points is not None and self.k > n_points:
            raise ConfigError(f"k={self.k} exceeds the number of points ({n_points})")
        if self.iterations < 1:
            raise ConfigError("max_iter must be at least 1")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.algo == "fcm" and not self.m > 1:
            raise ConfigError("fuzzifier must exceed 1")
        if self.empty_cluster_policy not in EMPTY_CLUSTER_POLICIES:
            raise ConfigError(f"unknown empty-cluster policy {self.empty_cluster_policy!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["max_iter"] = self.iterations
        return d


@dataclass
class ClusterModel:
    prototypes: np.ndarray
    labels: np.ndarray
    iterations: int
    converged: bool
    objective: float
    history: list = field(default_factory=list)
    membership: Optional[np.ndarray] = None

    @property
    def k(self) -> int:
        return self.prototypes.shape[0]

    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def as_points(data) -> np.ndarray:
    if isinstance(data, Dataset):
        return data.points
    pts = np.asarray(data, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ContractError("expected a non-empty 2-D array of points")
    return pts


def sq_distances(X: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, shape ``(len(X), len(P))``."""
    out = np.empty((X.shape[0], P.shape[0]))
    for start in range(0, X.shape[0], _CHUNK):
        diff = X[start:start + _CHUNK, None, :] - P[None, :, :]
        out[start:start + _CHUNK] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def nearest(X: np.ndarray, P: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of the nearest prototype per point and the squared distance to it.

    Ties go to the lowest prototype index.
    """
    d2 = sq_distances(X, P)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(X.shape[0]), labels]


def assign_points(data, prototypes) -> np.ndarray:
    """Label every point with the index of its nearest prototype."""
    X = as_points(data)
    P = np.asarray(prototypes, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if P.shape[0] == 0:
        raise ContractError("at least one prototype is required")
    if P.shape[1] != X.shape[1]:
        raise ContractError(f"prototype dimension {P.shape[1]} != data dimension {X.shape[1]}")
    return nearest(X, P)[0]


def reseed_empty(X: np.ndarray, P: np.ndarray, labels: np.ndarray) -> list[int]:
    """Move the prototype of every empty cluster onto the point farthest from
    its nearest prototype. Modifies `P` in place; returns the reseeded indices.
    """
    counts = np.bincount(labels, minlength=P.shape[0])
    empty = np.flatnonzero(counts == 0).tolist()
    if not empty:
        return []
    _, far = nearest(X, P)
    for j in empty:
        idx = int(np.argmax(far))
        P[j] = X[idx]
        far = np.minimum(far, np.sum((X - P[j]) ** 2, axis=1))
    return empty


class NearestTracker:
    """Nearest-prototype assignment maintained across small prototype moves.

    Keeps, per point, a lower bound on the distance to every prototype other
    than its own. After the prototypes move by ``delta_j`` the bound drops
    by the largest move among the other prototypes; a point whose exact
    distance to its own prototype stays below the bound keeps its label,
    every other point gets a full nearest search. Labels are always those
    of :func:`nearest`; only the work is skipped.
    """

    # slack so rounding in the bound bookkeeping can never keep a wrong label
    _REL = 1e-9
    _ABS = 1e-12

    def __init__(self, X: np.ndarray, P: np.ndarray):
        self.X = X
        self.P = P.copy()
        self.labels = np.zeros(X.shape[0], dtype=np.intp)
        self.d2 = np.empty(X.shape[0])
        self.lower = np.empty(X.shape[0])
        self._search(np.arange(X.shape[0]))

    def _search(self, rows: np.ndarray) -> None:
        D = sq_distances(self.X[rows], self.P)
        lab = np.argmin(D, axis=1)
        self.labels[rows] = lab
        self.d2[rows] = D[np.arange(rows.size), lab]
        if self.P.shape[0] > 1:
            self.lower[rows] = np.sqrt(np.partition(D, 1, axis=1)[:, 1])
        else:
            self.lower[rows] = np.inf

    def update(self, P_new: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Move to `P_new`; returns (labels, squared distance to own prototype)."""
        delta = np.sqrt(np.sum((P_new - self.P) ** 2, axis=1))
        self.P = P_new.copy()
        if delta.size > 1:
            order = np.argsort(delta)
            top, second = order[-1], delta[order[-2]]
            self.lower -= np.where(self.labels == top, second, delta[top])
        diff = self.X - self.P[self.labels]
        self.d2 = np.einsum("ij,ij->i", diff, diff)
        own = np.sqrt(self.d2)
        stale = np.flatnonzero(~(own * (1 + self._REL) + self._ABS < self.lower))
        if stale.size:
            self._search(stale)
        return self.labels.copy(), self.d2.copy()
