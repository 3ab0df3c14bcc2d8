"""Clustering error, repeated seeded runs, and fit timing."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Mapping, Sequence, Union

import numpy as np

from .baselines import fit_fcm, fit_kmeans, harden
from .core import AlgoConfig, ClusterModel, as_points
from .pocs import fit_pocs

CSV_FIELDS = ("algorithm", "dataset", "runs", "mean_error", "std_error", "mean_time_s")

FitFn = Callable[[np.ndarray, AlgoConfig], ClusterModel]


def _fit_fcm_hard(data, config: AlgoConfig) -> ClusterModel:
    return harden(fit_fcm(data, config))


FITTERS: dict[str, FitFn] = {
    "pocs": fit_pocs,
    "kmeans": fit_kmeans,
    "fcm": _fit_fcm_hard,
}


def clustering_error(model: ClusterModel, data) -> float:
    """Sum of (unsquared) Euclidean distances from each point to its cluster's prototype."""
    X = as_points(data)
    return float(np.sqrt(np.sum((X - model.prototypes[model.labels]) ** 2, axis=1)).sum())


def sse(model: ClusterModel, data) -> float:
    """Within-cluster sum of squared distances (the K-Means cost)."""
    X = as_points(data)
    return float(np.sum((X - model.prototypes[model.labels]) ** 2))


@dataclass
class RunReport:
    algorithm: str
    dataset: str
    seed: int
    error: float
    objective: float
    iterations: int
    converged: bool
    wall_clock_fit: float


class RunningStats:
    """Welford's streaming mean and population variance."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self._m2 = 0.0

    def push(self, x: float) -> None:
        self.n += 1
        delta = x - self.mean
        self.mean += delta / self.n
        self._m2 += delta * (x - self.mean)

    @property
    def std(self) -> float:
        return math.sqrt(self._m2 / self.n) if self.n else 0.0


@dataclass
class AggregateRow:
    algorithm: str
    dataset: str
    runs: int
    mean_error: float
    std_error: float
    mean_time_s: float


@dataclass
class AggregateReport:
    rows: list[AggregateRow] = field(default_factory=list)
    runs: list[RunReport] = field(default_factory=list)

    def row(self, algorithm: str, dataset: str) -> AggregateRow:
        for r in self.rows:
            if r.algorithm == algorithm and r.dataset == dataset:
                return r
        raise KeyError((algorithm, dataset))

    def extend(self, other: "AggregateReport") -> None:
        self.rows.extend(other.rows)
        self.runs.extend(other.runs)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_FIELDS)
        for r in self.rows:
            w.writerow([r.algorithm, r.dataset, r.runs, f"{r.mean_error:.6f}",
                        f"{r.std_error:.6f}", f"{r.mean_time_s:.3f}"])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [dict(asdict(r), mean_time_s=round(r.mean_time_s, 3)) for r in self.rows]
        runs = [dict(asdict(r), wall_clock_fit=round(r.wall_clock_fit, 6)) for r in self.runs]
        doc = {"fields": list(CSV_FIELDS), "rows": rows, "runs": runs}
        return json.dumps(doc, indent=2) + "\n"


def run_once(fit: FitFn, name: str, data, config: AlgoConfig, dataset_name: str = "",
             timing: bool = True, scorer=None) -> RunReport:
    X = as_points(data)
    t0 = time.perf_counter()
    model = fit(X, config)
    elapsed = time.perf_counter() - t0
    return RunReport(
        algorithm=name,
        dataset=dataset_name,
        seed=config.seed,
        error=scorer(model) if scorer is not None else clustering_error(model, X),
        objective=float(model.objective),
        iterations=int(model.iterations),
        converged=bool(model.converged),
        wall_clock_fit=elapsed if timing else 0.0,
    )


def run_experiment(
    data,
    algorithms: Union[Sequence[str], Mapping[str, FitFn]],
    runs: int,
    base_seed: int,
    config: AlgoConfig,
    dataset_name: str = "",
    workers: int = 1,
    timing: bool = True,
    scorer: Callable[[ClusterModel], float] | None = None,
) -> AggregateReport:
    """Fit every algorithm `runs` times with seeds ``base_seed + i``.

    `algorithms` is a list of registered names or a mapping name -> fit
    function. `config` supplies k and tolerances; ``max_iter=None`` lets
    each algorithm use its own default. Only the fit call is timed.
    With ``workers > 1`` runs execute on a thread pool; results are still
    collected in seed order, so error statistics do not depend on it.
    `scorer` replaces the default error (clustering error on `data`).
    """
    if runs < 1:
        raise ValueError("runs must be at least 1")
    if isinstance(algorithms, Mapping):
        fitters = dict(algorithms)
    else:
        fitters = {name: FITTERS[name] for name in algorithms}
    X = as_points(data)
    report = AggregateReport()
    for name, fit in fitters.items():
        algo = name if name in FITTERS else config.algo
        configs = [replace(config, algo=algo, seed=base_seed + i) for i in range(runs)]

        def one(cfg, fit=fit, name=name):
            try:
                return run_once(fit, name, X, cfg, dataset_name, timing, scorer)
            except Exception as exc:
                raise RuntimeError(f"{name} failed on {dataset_name or 'data'} with seed {cfg.seed}: {exc}") from exc

        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                results = list(pool.map(one, configs))
        else:
            results = [one(cfg) for cfg in configs]
        err, tim = RunningStats(), RunningStats()
        for r in results:
            err.push(r.error)
            tim.push(r.wall_clock_fit)
        report.runs.extend(results)
        report.rows.append(AggregateRow(name, dataset_name, runs, err.mean, err.std, tim.mean))
    return report
