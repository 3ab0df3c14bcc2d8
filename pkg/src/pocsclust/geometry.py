"""Closed convex sets, exact projections, and POCS iteration schemes.

Sets carry their own closed-form projection. Two iteration schemes are
provided:

* :func:`alternating_pocs` applies the projections one after another in a
  fixed order. With a non-empty intersection it lands in the intersection;
  with disjoint sets it settles into a limit cycle.
* :func:`parallel_pocs` projects onto every set at once and moves to the
  weighted combination of the projections. For disjoint sets it converges
  to the minimizer of the weighted sum of squared distances to the sets.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import ContractError

SET_TOL = 1e-12
CYCLE_MEMORY = 8


def _vec(x, name="point") -> np.ndarray:
    a = np.array(x, dtype=float).reshape(-1)
    if a.size == 0:
        raise ContractError(f"{name} must have dimension >= 1")
    if not np.all(np.isfinite(a)):
        raise ContractError(f"{name} has non-finite coordinates")
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Singleton:
    center: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))

    @property
    def dim(self) -> int:
        return self.center.size

    def project(self, x: np.ndarray) -> np.ndarray:
        return self.center.copy()

    def contains(self, y, tol: float = SET_TOL) -> bool:
        return bool(np.max(np.abs(np.asarray(y, float) - self.center)) <= tol)


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, "center"))
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ContractError("ball radius must be positive and finite")

    @property
    def dim(self) -> int:
        return self.center.size

    def project(self, x: np.ndarray) -> np.ndarray:
        offset = x - self.center
        dist = np.linalg.norm(offset)
        if dist <= self.radius:
            return x.copy()
        return self.center + offset * (self.radius / dist)

    def contains(self, y, tol: float = SET_TOL) -> bool:
        return bool(np.linalg.norm(np.asarray(y, float) - self.center) <= self.radius + tol)


@dataclass(frozen=True)
class HalfSpace:
    """The set ``{y : normal . y <= offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        object.__setattr__(self, "normal", _vec(self.normal, "normal"))
        if not np.any(self.normal):
            raise ContractError("half-space normal must be non-zero")
        if not np.isfinite(self.offset):
            raise ContractError("half-space offset must be finite")

    @property
    def dim(self) -> int:
        return self.normal.size

    def project(self, x: np.ndarray) -> np.ndarray:
        excess = float(self.normal @ x) - self.offset
        if excess <= 0:
            return x.copy()
        return x - (excess / float(self.normal @ self.normal)) * self.normal

    def contains(self, y, tol: float = SET_TOL) -> bool:
        scale = max(1.0, float(np.linalg.norm(self.normal)))
        return bool(float(self.normal @ np.asarray(y, float)) - self.offset <= tol * scale)


@dataclass(frozen=True)
class Box:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo, hi = _vec(self.lower, "lower"), _vec(self.upper, "upper")
        if lo.shape != hi.shape:
            raise ContractError("box bounds differ in dimension")
        if np.any(lo > hi):
            raise ContractError("box lower bound exceeds upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.size

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def contains(self, y, tol: float = SET_TOL) -> bool:
        y = np.asarray(y, float)
        return bool(np.all(y >= self.lower - tol) and np.all(y <= self.upper + tol))


ConvexSet = Union[Singleton, Ball, HalfSpace, Box]


@dataclass
class PocsTrace:
    """Iterates visited by a POCS run, starting with the initial point."""

    iterates: list[np.ndarray]
    converged: bool = False
    cycle_detected: bool = False
    cycles: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.iterates[-1]


def _check_dims(sets: Sequence[ConvexSet], x: np.ndarray) -> None:
    if not sets:
        raise ContractError("at least one convex set is required")
    for s in sets:
        if s.dim != x.size:
            raise ContractError(
                f"dimension mismatch: set has dimension {s.dim}, point has {x.size}"
            )


def project(cset: ConvexSet, x) -> np.ndarray:
    """Euclidean projection of `x` onto `cset`.

    Points already inside the set are returned unchanged.
    """
    x = np.array(x, dtype=float).reshape(-1)
    _check_dims([cset], x)
    return cset.project(x)


def alternating_pocs(sets, x0, max_iter: int = 10_000, tol: float = 1e-9) -> PocsTrace:
    """Cyclic projections ``x <- P_n(...P_2(P_1(x)))``.

    Every individual projection is recorded in ``trace.iterates``. A full
    sweep over the sets counts as one iteration. The run stops when

    * a sweep moves no point by more than `tol` (max-norm): ``converged``;
    * a sweep ends within `tol` of one of the last few sweep endpoints
      while still moving between sets: ``cycle_detected``;
    * `max_iter` sweeps have run.
    """
    sets = list(sets)
    x = np.array(x0, dtype=float).reshape(-1)
    _check_dims(sets, x)
    iterates = [x.copy()]
    endpoints: list[np.ndarray] = []
    trace = PocsTrace(iterates)
    for sweep in range(1, max_iter + 1):
        stationary = True
        for s in sets:
            y = s.project(x)
            if np.max(np.abs(y - x)) > tol:
                stationary = False
            x = y
            iterates.append(x.copy())
        trace.cycles = sweep
        if stationary:
            trace.converged = True
            break
        if any(np.max(np.abs(x - e)) <= tol for e in endpoints[-CYCLE_MEMORY:]):
            trace.cycle_detected = True
            break
        endpoints.append(x.copy())
    return trace


def parallel_pocs(sets, weights, x0, max_iter: int = 10_000, tol: float = 1e-9) -> PocsTrace:
    """Simultaneous weighted projections ``x <- x + sum_i w_i (P_i(x) - x)``.

    `weights` must be non-negative and sum to one (within 1e-9). Stops when
    a step moves the point by at most `tol` in max-norm, or after
    `max_iter` steps.
    """
    sets = list(sets)
    w = np.asarray(weights, dtype=float).reshape(-1)
    x = np.array(x0, dtype=float).reshape(-1)
    _check_dims(sets, x)
    if w.size != len(sets):
        raise ContractError(f"got {w.size} weights for {len(sets)} sets")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ContractError("weights must be non-negative and finite")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ContractError(f"weights must sum to 1, got {w.sum()!r}")
    # sum_i w_i (P_i - x) rearranged so that exact unit weights reduce to sum_i w_i P_i
    residual = 1.0 - w.sum()
    trace = PocsTrace([x.copy()])
    for step in range(1, max_iter + 1):
        projections = np.stack([s.project(x) for s in sets])
        nxt = w @ projections + residual * x
        moved = np.max(np.abs(nxt - x))
        x = nxt
        trace.iterates.append(x.copy())
        trace.cycles = step
        if moved <= tol:
            trace.converged = True
            break
    return trace


def weighted_sq_distance(sets, weights, x) -> float:
    """``sum_i w_i ||x - P_i(x)||^2``, the quantity parallel POCS minimizes."""
    x = np.asarray(x, dtype=float).reshape(-1)
    return float(sum(w * np.sum((x - s.project(x)) ** 2) for s, w in zip(sets, weights)))


def fd_gradient(f, x, step: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of scalar `f` at `x`."""
    x = np.asarray(x, dtype=float).reshape(-1)
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        grad[i] = (f(x + e) - f(x - e)) / (2 * step)
    return grad
