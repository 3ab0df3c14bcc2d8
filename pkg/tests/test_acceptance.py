"""Acceptance gate: one test per criterion, each reported as a PASS/FAIL line."""

import math
import subprocess
import sys

import numpy as np
import pytest

from pocsclust import AlgoConfig, ClusterModel, ParseError
from pocsclust.baselines import kmeanspp_init
from pocsclust.data import data_root, load_benchmark, load_dataset, make_blobs, parse_points, registry
from pocsclust.evaluation import clustering_error, run_experiment
from pocsclust.geometry import (
    Ball,
    Box,
    HalfSpace,
    Singleton,
    alternating_pocs,
    parallel_pocs,
    project,
    weighted_sq_distance,
)
from pocsclust.pocs import pocs_update_prototype, pocs_weights

DATASETS = ("a1", "a2", "s1", "s2", "r15", "aggregation")
ALGOS = ("pocs", "kmeans", "fcm")
RUNS = 20
TRIALS = 1000

# mean clustering error over 20 runs on normalized data
REFERENCE = {
    "pocs": {"a1": 90.4, "a2": 159.5, "s1": 205.2, "s2": 228.2, "r15": 19.3, "aggregation": 80.3},
    "kmeans": {"a1": 101.4, "a2": 172.5, "s1": 265.3, "s2": 270.6, "r15": 27.0, "aggregation": 80.5},
    "fcm": {"a1": 88.8, "a2": 175.8, "s1": 198.9, "s2": 233.3, "r15": 16.7, "aggregation": 81.8},
}
TOLERANCE = {"pocs": 0.10, "kmeans": 0.15, "fcm": 0.15}
EXPECTED_SHAPE = {"a1": (3000, 2), "a2": (5250, 2), "s1": (5000, 2), "s2": (5000, 2),
                  "r15": (600, 2), "aggregation": (788, 2)}


def require_files():
    missing = [str(e.path()) for n, e in registry().items() if n in DATASETS and not e.path().is_file()]
    if missing:
        pytest.fail(f"dataset missing: {', '.join(missing)} (root {data_root()}; set POCS_DATA_DIR)",
                    pytrace=False)


_TABLE3 = {}


def table3():
    """Error and timing statistics for every algorithm on every benchmark, computed once."""
    require_files()
    if not _TABLE3:
        for name in DATASETS:
            ds, _, _ = load_benchmark(name)
            k = registry()[name].clusters
            _TABLE3[name] = run_experiment(ds.points, ALGOS, RUNS, 0, AlgoConfig(k=k), dataset_name=name)
    return _TABLE3


@pytest.mark.benchmark
@pytest.mark.criterion(1, "mean clustering error within tolerance of the reference table")
def test_criterion_1_error_means():
    reports = table3()
    misses = []
    for name in DATASETS:
        for algo in ALGOS:
            got = reports[name].row(algo, name).mean_error
            ref = REFERENCE[algo][name]
            if abs(got - ref) > TOLERANCE[algo] * ref:
                misses.append(f"{algo}/{name}: {got:.1f} vs {ref} ±{TOLERANCE[algo]:.0%}")
    assert not misses, "; ".join(misses)


@pytest.mark.benchmark
@pytest.mark.criterion(2, "POCS error std <= K-Means error std on at least 5 of 6 datasets")
def test_criterion_2_stability():
    reports = table3()
    wins = [n for n in DATASETS
            if reports[n].row("pocs", n).std_error <= reports[n].row("kmeans", n).std_error]
    assert len(wins) >= 5, f"POCS std <= K-Means std only on {wins}"


@pytest.mark.benchmark
@pytest.mark.criterion(3, "POCS fit time <= FCM and <= 2x K-Means on all datasets")
def test_criterion_3_timing_order():
    reports = table3()
    bad = []
    for n in DATASETS:
        p, k, f = (reports[n].row(a, n).mean_time_s for a in ("pocs", "kmeans", "fcm"))
        if not (p <= f and p <= 2 * k):
            bad.append(f"{n}: pocs {p:.4f}s kmeans {k:.4f}s fcm {f:.4f}s")
    assert not bad, "; ".join(bad)


@pytest.mark.criterion(4, "prototype update identities over 1000 randomized trials each")
def test_criterion_4_algebraic_identities():
    rng = np.random.default_rng(2024)

    def instance():
        d = int(rng.integers(1, 6))
        return rng.normal(size=d) * 3, rng.normal(size=(int(rng.integers(1, 50)), d)) * 3

    for _ in range(TRIALS):
        x, D = instance()
        dist = np.array([math.sqrt(sum((xi - di) ** 2 for xi, di in zip(x, row))) for row in D])
        w = dist / dist.sum()
        assert np.max(np.abs(pocs_update_prototype(x, D) - w @ D)) <= 1e-12
    for _ in range(TRIALS):
        x, D = instance()
        assert abs(pocs_weights(x, D).sum() - 1.0) <= 1e-9
    for _ in range(TRIALS):
        x, D = instance()
        alpha = float(rng.uniform(0.01, 100))
        lhs = pocs_update_prototype(alpha * x, alpha * D)
        rhs = alpha * pocs_update_prototype(x, D)
        assert np.max(np.abs(lhs - rhs)) <= 1e-9 * max(1.0, alpha)
    for _ in range(TRIALS):
        x, D = instance()
        perm = rng.permutation(len(D))
        assert np.max(np.abs(pocs_update_prototype(x, D[perm]) - pocs_update_prototype(x, D))) <= 1e-12


def _random_set(rng, dim):
    kind = int(rng.integers(4))
    c = rng.normal(size=dim) * 3
    if kind == 0:
        return Singleton(c)
    if kind == 1:
        return Ball(c, float(rng.uniform(0.1, 3)))
    if kind == 2:
        return HalfSpace(rng.normal(size=dim), float(rng.normal()))
    lo = c - rng.uniform(0, 2, dim)
    return Box(lo, lo + rng.uniform(0, 3, dim))


def _central_gradient(f, x, h=1e-5):
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


@pytest.mark.criterion(5, "projection properties, alternating and parallel POCS limits")
def test_criterion_5_geometry():
    rng = np.random.default_rng(5)
    for _ in range(TRIALS):
        dim = int(rng.integers(1, 5))
        s = _random_set(rng, dim)
        a, b = rng.normal(size=dim) * 5, rng.normal(size=dim) * 5
        pa, pb = project(s, a), project(s, b)
        assert np.max(np.abs(project(s, pa) - pa)) <= 1e-12
        assert np.linalg.norm(pa - pb) <= np.linalg.norm(a - b) + 1e-12

    # intersecting scenes: balls that all contain a common point
    for _ in range(100):
        common = rng.normal(size=2)
        sets = []
        for _ in range(int(rng.integers(2, 5))):
            c = common + rng.normal(size=2)
            sets.append(Ball(c, float(np.linalg.norm(c - common) + rng.uniform(0.05, 1))))
        trace = alternating_pocs(sets, rng.normal(size=2) * 10, 10_000, 1e-9)
        assert all(s.contains(trace.final, 1e-9) for s in sets)

    # disjoint scenes: the parallel limit is stationary for the weighted squared distance
    for centers in ([(0, 0), (4, 0)], [(0, 0), (4, 0), (2, 4)], [(-3, 1), (5, 2), (0, -6), (1, 9)]):
        sets = [Ball(c, 1.0) for c in centers]
        w = rng.random(len(sets))
        w /= w.sum()
        trace = parallel_pocs(sets, w, (7.0, 7.0), 10_000, 1e-9)
        grad = _central_gradient(lambda x: weighted_sq_distance(sets, w, x), trace.final)
        assert np.linalg.norm(grad) <= 1e-4

    # singletons: the parallel limit is the weighted mean, exactly
    pts = np.array([[0.0, 0.0], [4.0, 0.0], [2.0, 3.0], [1.0, 7.0]])
    w = np.array([0.5, 0.25, 0.125, 0.125])
    trace = parallel_pocs([Singleton(p) for p in pts], w, (9.0, -3.0))
    assert np.array_equal(trace.final, w @ pts)


@pytest.mark.criterion(6, "clustering error and k-means++ against independent oracles")
def test_criterion_6_oracles():
    rng = np.random.default_rng(6)
    for _ in range(TRIALS):
        n, d, k = int(rng.integers(1, 40)), int(rng.integers(1, 4)), int(rng.integers(1, 6))
        X, P = rng.random((n, d)), rng.random((k, d))
        labels = rng.integers(0, k, n)
        naive = 0.0
        for j in range(k):
            for i in range(n):
                if labels[i] == j:
                    naive += math.sqrt(sum((X[i][c] - P[j][c]) ** 2 for c in range(d)))
        model = ClusterModel(P, labels, 0, True, 0.0)
        assert abs(clustering_error(model, X) - naive) <= 1e-12

    X = np.array([[0.0], [0.0], [10.0]])
    for seed in range(100):
        assert sorted(kmeanspp_init(X, 2, seed)[:, 0]) == [0.0, 10.0]


@pytest.mark.benchmark
@pytest.mark.criterion(7, "loader row/attribute counts and line-numbered parse errors")
def test_criterion_7_loader(tmp_path):
    ragged = tmp_path / "ragged.txt"
    ragged.write_text("1.0 2.0\n1.0 2.0 3.0\n")
    with pytest.raises(ParseError) as exc:
        load_dataset(ragged)
    assert exc.value.line == 2
    with pytest.raises(ParseError) as exc:
        parse_points("1 2\n3 4\nfive 6\n")
    assert exc.value.line == 3

    require_files()
    for name in DATASETS:
        _, _, raw = load_benchmark(name)
        assert raw.shape == EXPECTED_SHAPE[name], f"{name}: {raw.shape}"


@pytest.mark.criterion(8, "fit/bench/plot outputs are byte-identical across invocations")
def test_criterion_8_determinism(tmp_path):
    ds, _ = make_blobs(4, 50, 2, 0.03, 0.3, 8)
    data = tmp_path / "blobs.txt"
    np.savetxt(data, ds.points, fmt="%.8f")

    def cli(*args):
        proc = subprocess.run([sys.executable, "-m", "pocsclust", *map(str, args)],
                              capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        return proc.stdout

    for tag in ("a", "b"):
        for algo in ALGOS:
            cli("fit", "--data", data, "--k", 4, "--algo", algo, "--seed", 3, "--no-timing",
                "--out", tmp_path / f"{tag}-{algo}.json")
        cli("bench", "--data", data, "--k", 4, "--runs", 3, "--seed", 3, "--no-timing",
            "--out", tmp_path / f"{tag}-bench")
        cli("plot", "--fit", tmp_path / f"{tag}-pocs.json", "--out", tmp_path / f"{tag}.svg")
    outputs = [f"{algo}.json" for algo in ALGOS] + ["bench/bench.csv", "bench/bench.json", ".svg"]
    for name in outputs:
        a = (tmp_path / f"a-{name}" if not name.startswith(".") else tmp_path / f"a{name}").read_bytes()
        b = (tmp_path / f"b-{name}" if not name.startswith(".") else tmp_path / f"b{name}").read_bytes()
        assert a == b, name
