"""Command-line entry point: ``pocsclust {fit,bench,plot,demo-pocs,datasets}``.

Exit status is 0 on success, 1 on data or runtime failures and 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import geometry as geo
from .core import AlgoConfig, ClusterModel, Dataset
from .data import DATA_DIR_ENV, NormalizationSpec, RawTable, data_root, load_dataset, normalize, registry, sha256_of
from .errors import ConfigError, ContractError, ParseError
from .evaluation import FITTERS, AggregateReport, clustering_error, run_experiment
from .svg import cluster_scatter, pocs_paths, set_outline


DEFAULT_BENCH = ("a1", "a2", "s1", "s2", "r15", "aggregation")


class CliFailure(Exception):
    """Runtime failure reported with exit status 1."""


# -- argument parsing --------------------------------------------------------------


def _columns(text: str) -> tuple[int, ...]:
    try:
        cols = tuple(int(c) for c in text.split(",") if c.strip() != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid column list {text!r}") from None
    if not cols:
        raise argparse.ArgumentTypeError("empty column list")
    return cols


def _seed(text: str) -> int:
    value = int(text)
    if value < 0 or value >= 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _add_data_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    src = p.add_mutually_exclusive_group(required=required)
    src.add_argument("--data", help="path to a point file")
    src.add_argument("--dataset", help="registered benchmark name (see `datasets`)")
    p.add_argument("--columns", type=_columns, help="comma-separated column indices to keep")
    p.add_argument("--delimiter", choices=("whitespace", "comma"), help="default: auto-detect")


def _add_algo_args(p: argparse.ArgumentParser, single: bool = True) -> None:
    if single:
        p.add_argument("--algo", choices=tuple(FITTERS), default="pocs")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--max-iter", type=_positive_int,
                   help="iteration cap (default 100 pocs / 300 kmeans / 300 fcm)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--m", type=float, default=2.0, help="FCM fuzzifier (default 2.0)")
    p.add_argument("--no-reassign", action="store_true",
                   help="POCS: keep the initial assignment for the whole run")
    p.add_argument("--raw-space", action="store_true",
                   help="fit on raw coordinates instead of min-max normalized ones")
    p.add_argument("--no-timing", action="store_true",
                   help="record wall-clock fields as 0 so output is byte-reproducible")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pocsclust", description="POCS-based clustering with K-Means and Fuzzy C-Means baselines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one model and print it as JSON")
    p.set_defaults(subparser=p)
    _add_data_args(p)
    p.add_argument("--k", type=_positive_int, required=True)
    _add_algo_args(p)
    p.add_argument("--out", help="also write the JSON to this path")

    p = sub.add_parser("bench", help="repeated seeded runs; writes CSV and JSON")
    p.set_defaults(subparser=p)
    p.add_argument("--datasets",
                   help="comma-separated registered dataset names (default: all six, unless --data is given)")
    p.add_argument("--data", action="append", default=[],
                   help="extra point file (repeatable); requires --k")
    p.add_argument("--algos", default="pocs,kmeans,fcm")
    p.add_argument("--k", type=_positive_int, help="override the registry cluster count")
    p.add_argument("--runs", type=_positive_int, default=20)
    p.add_argument("--columns", type=_columns)
    _add_algo_args(p, single=False)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--timing-sequential", action="store_true",
                   help="run fits one at a time for clean timings")
    p.add_argument("--out", default=".", help="output directory for bench.csv / bench.json")

    p = sub.add_parser("plot", help="SVG scatter of a 2-D clustering")
    p.set_defaults(subparser=p)
    p.add_argument("--fit", dest="fit_json", help="JSON written by `fit`")
    _add_data_args(p, required=False)
    p.add_argument("--k", type=_positive_int)
    _add_algo_args(p)
    p.add_argument("--out", required=True, help="SVG path")

    p = sub.add_parser("demo-pocs", help="alternating vs parallel POCS on a built-in scene")
    p.set_defaults(subparser=p)
    p.add_argument("--scene", required=True, help=f"one of: {', '.join(SCENES)}")
    p.add_argument("--max-iter", type=_positive_int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--svg", help="write iterate paths to this SVG")

    p = sub.add_parser("datasets", help="list registered benchmark files")
    p.set_defaults(subparser=p)
    p.add_argument("--hash", action="store_true", help="print sha256 of local copies")
    return parser


# -- shared helpers ----------------------------------------------------------------


@dataclass
class LoadedData:
    name: str
    path: str
    columns: tuple[int, ...] | None
    table: RawTable
    normalized: Dataset
    spec: NormalizationSpec

    def fit_space(self, raw: bool) -> np.ndarray:
        return self.table.rows if raw else self.normalized.points


def _load(data_path, dataset_name, columns, delimiter) -> LoadedData:
    if dataset_name is not None:
        entries = registry()
        if dataset_name not in entries:
            raise CliFailure(f"unknown dataset {dataset_name!r}; known: {', '.join(entries)}")
        entry = entries[dataset_name]
        path = entry.path()
        if columns is None:
            columns = entry.columns
        name = dataset_name
    else:
        path = Path(data_path)
        name = path.stem
    try:
        table = load_dataset(path, delimiter, columns)
    except OSError as exc:
        raise CliFailure(f"cannot read {path}: {exc.strerror or exc}") from None
    except ParseError as exc:
        raise CliFailure(str(exc)) from None
    ds, spec = normalize(table, name)
    return LoadedData(name, str(path), columns, table, ds, spec)


def _config(args, algo: str, k: int) -> AlgoConfig:
    return AlgoConfig(k=k, algo=algo, seed=args.seed, max_iter=args.max_iter, tol=args.tol,
                      m=args.m, reassign=not args.no_reassign)


def _check_fuzzifier(parser, args, algos) -> None:
    if "fcm" in algos and not args.m > 1:
        parser.error("fuzzifier must exceed 1")
    if not args.tol > 0:
        parser.error("--tol must be positive")


def _fit_document(loaded: LoadedData, args, config: AlgoConfig) -> dict:
    X = loaded.fit_space(args.raw_space)
    t0 = time.perf_counter()
    model = FITTERS[config.algo](X, config)
    elapsed = time.perf_counter() - t0
    if args.raw_space:
        protos_norm = loaded.spec.apply(model.prototypes)
        protos_raw = model.prototypes
    else:
        protos_norm = model.prototypes
        protos_raw = loaded.spec.invert(model.prototypes)
    scored = ClusterModel(protos_norm, model.labels, model.iterations, model.converged, model.objective)
    error = clustering_error(scored, loaded.normalized)
    cfg = config.to_dict()
    cfg.update(raw_space=bool(args.raw_space), columns=list(loaded.columns) if loaded.columns else None)
    return {
        "algorithm": config.algo,
        "dataset": loaded.name,
        "data_path": loaded.path,
        "n_points": loaded.normalized.n_points,
        "dim": loaded.normalized.dim,
        "config": cfg,
        "iterations": int(model.iterations),
        "converged": bool(model.converged),
        "error": error,
        "objective": float(model.objective),
        "wall_clock_s": 0.0 if args.no_timing else round(elapsed, 6),
        "cluster_sizes": model.cluster_sizes().tolist(),
        "prototypes": protos_norm.tolist(),
        "prototypes_raw": np.asarray(protos_raw).tolist(),
        "labels": model.labels.tolist(),
    }


def _dumps(doc) -> str:
    """One top-level key per line, values compact (label arrays can be long)."""
    body = ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in doc.items())
    return "{\n" + body + "\n}\n"


# -- subcommands -------------------------------------------------------------------


def cmd_fit(args, parser) -> int:
    _check_fuzzifier(parser, args, [args.algo])
    loaded = _load(args.data, args.dataset, args.columns, args.delimiter)
    config = _config(args, args.algo, args.k)
    try:
        config.validate(loaded.normalized.n_points)
        doc = _fit_document(loaded, args, config)
    except (ConfigError, ContractError) as exc:
        raise CliFailure(str(exc)) from None
    text = _dumps(doc)
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    return 0


def _table(report: AggregateReport, datasets: list[str], algos: list[str], field: str) -> str:
    width = max(14, *(len(d) + 2 for d in datasets))
    lines = [" " * width + "".join(f"{a:>20}" for a in algos)]
    for d in datasets:
        cells = []
        for a in algos:
            r = report.row(a, d)
            if field == "error":
                cells.append(f"{r.mean_error:>12.1f} ± {r.std_error:<5.1f}")
            else:
                cells.append(f"{r.mean_time_s:>20.3f}")
        lines.append(f"{d:<{width}}" + "".join(cells))
    return "\n".join(lines)


def cmd_bench(args, parser) -> int:
    algos = [a.strip() for a in args.algos.split(",") if a.strip()]
    unknown = [a for a in algos if a not in FITTERS]
    if unknown:
        parser.error(f"unknown algorithm(s): {', '.join(unknown)}")
    _check_fuzzifier(parser, args, algos)
    if args.datasets is not None:
        names = [d.strip() for d in args.datasets.split(",") if d.strip()]
    else:
        names = [] if args.data else list(DEFAULT_BENCH)
    if args.data and args.k is None:
        parser.error("--data requires --k")
    entries = registry()
    bad = [n for n in names if n not in entries]
    if bad:
        parser.error(f"unknown dataset(s): {', '.join(bad)}; known: {', '.join(entries)}")
    sources = [(n, None) for n in names] + [(None, p) for p in args.data]
    missing = [str(entries[n].path()) for n, _ in sources if n is not None and not entries[n].path().is_file()]
    missing += [p for _, p in sources if p is not None and not Path(p).is_file()]
    if missing:
        raise CliFailure("missing dataset file(s): " + ", ".join(missing)
                         + f" (set {DATA_DIR_ENV} or download them; see README)")
    workers = 1 if args.timing_sequential else args.workers
    report = AggregateReport()
    shown = []
    for name, path in sources:
        loaded = _load(path, name, args.columns, None)
        k = args.k if args.k is not None else entries[name].clusters
        base = _config(args, "pocs", k)
        scorer = _scorer(loaded) if args.raw_space else None
        try:
            base.validate(loaded.normalized.n_points)
            part = run_experiment(loaded.fit_space(args.raw_space), algos, args.runs, args.seed, base,
                                  dataset_name=loaded.name, workers=workers, timing=not args.no_timing,
                                  scorer=scorer)
        except (ConfigError, ContractError, RuntimeError) as exc:
            raise CliFailure(str(exc)) from None
        report.extend(part)
        shown.append(loaded.name)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench.csv").write_text(report.to_csv())
    (out / "bench.json").write_text(report.to_json())
    print("Clustering error (mean ± std over %d runs)" % args.runs)
    print(_table(report, shown, algos, "error"))
    print()
    print("Mean fit time (s)")
    print(_table(report, shown, algos, "time"))
    print(f"\nwrote {out / 'bench.csv'} and {out / 'bench.json'}")
    return 0


def _scorer(loaded: LoadedData):
    """Score raw-space fits on normalized coordinates like all others."""

    def score(model: ClusterModel) -> float:
        scaled = ClusterModel(loaded.spec.apply(model.prototypes), model.labels,
                              model.iterations, model.converged, model.objective)
        return clustering_error(scaled, loaded.normalized)

    return score


def cmd_plot(args, parser) -> int:
    if args.fit_json:
        try:
            doc = json.loads(Path(args.fit_json).read_text())
        except (OSError, ValueError) as exc:
            raise CliFailure(f"cannot read fit JSON {args.fit_json}: {exc}") from None
        data_path = args.data or doc["data_path"]
        columns = args.columns if args.columns is not None else doc["config"].get("columns")
        loaded = _load(data_path, None, columns, args.delimiter)
        labels = np.asarray(doc["labels"], dtype=int)
        prototypes = np.asarray(doc["prototypes"], dtype=float)
        if labels.shape[0] != loaded.normalized.n_points:
            raise CliFailure("fit JSON does not match the data file (point count differs)")
        title = f"{doc['algorithm']} on {doc['dataset']}"
    else:
        if args.data is None and args.dataset is None:
            parser.error("plot needs --fit or --data/--dataset with --k")
        if args.k is None:
            parser.error("--k is required when plotting without --fit")
        _check_fuzzifier(parser, args, [args.algo])
        loaded = _load(args.data, args.dataset, args.columns, args.delimiter)
        config = _config(args, args.algo, args.k)
        try:
            config.validate(loaded.normalized.n_points)
            doc = _fit_document(loaded, args, config)
        except (ConfigError, ContractError) as exc:
            raise CliFailure(str(exc)) from None
        labels = np.asarray(doc["labels"], dtype=int)
        prototypes = np.asarray(doc["prototypes"], dtype=float)
        title = f"{args.algo} on {loaded.name}"
    if loaded.normalized.dim != 2:
        raise CliFailure("plotting supports 2-D datasets only")
    svg = cluster_scatter(loaded.normalized.points, labels, prototypes, title=title)
    Path(args.out).write_text(svg)
    print(f"wrote {args.out}")
    return 0


@dataclass
class Scene:
    sets: list
    weights: list
    x0: tuple
    bounds: tuple


def _scenes() -> dict[str, Scene]:
    return {
        "intersecting-balls": Scene(
            [geo.Ball((0.0, 0.0), 1.0), geo.Ball((1.0, 0.0), 1.0)], [0.5, 0.5], (5.0, 5.0),
            ((-1.5, -1.5), (5.5, 5.5)),
        ),
        "disjoint-balls": Scene(
            [geo.Ball((0.0, 0.0), 1.0), geo.Ball((4.0, 0.0), 1.0), geo.Ball((2.0, 4.0), 1.0)],
            [1 / 3, 1 / 3, 1 / 3], (5.0, 5.0), ((-1.5, -1.5), (5.5, 5.5)),
        ),
        "three-singletons": Scene(
            [geo.Singleton((0.0, 0.0)), geo.Singleton((4.0, 0.0)), geo.Singleton((2.0, 3.0))],
            [0.25, 0.25, 0.5], (5.0, 5.0), ((-0.5, -0.5), (5.5, 5.5)),
        ),
    }


SCENES = ("intersecting-balls", "disjoint-balls", "three-singletons")


def _fmt(p) -> str:
    return "(" + ", ".join(f"{v:.9f}" for v in p) + ")"


def cmd_demo_pocs(args, parser) -> int:
    scenes = _scenes()
    if args.scene not in scenes:
        parser.error(f"unknown scene {args.scene!r}; choose from {', '.join(SCENES)}")
    sc = scenes[args.scene]
    alt = geo.alternating_pocs(sc.sets, sc.x0, args.max_iter, args.tol)
    par = geo.parallel_pocs(sc.sets, sc.weights, sc.x0, args.max_iter, args.tol)
    in_all = all(s.contains(alt.final, geo.SET_TOL * 1e3) for s in sc.sets)
    grad = geo.fd_gradient(lambda x: geo.weighted_sq_distance(sc.sets, sc.weights, x), par.final)
    lines = [
        f"scene: {args.scene}",
        f"alternating: sweeps={alt.cycles} projections={len(alt.iterates) - 1} "
        f"converged={str(alt.converged).lower()} cycle_detected={str(alt.cycle_detected).lower()}",
        f"alternating final: {_fmt(alt.final)}",
        f"alternating final in every set: {str(in_all).lower()}",
        f"parallel: steps={par.cycles} converged={str(par.converged).lower()}",
        f"parallel final: {_fmt(par.final)}",
        f"parallel weighted squared distance: {geo.weighted_sq_distance(sc.sets, sc.weights, par.final):.9e}",
        f"parallel gradient norm: {np.linalg.norm(grad):.3e}",
    ]
    if all(isinstance(s, geo.Singleton) for s in sc.sets):
        mean = np.asarray(sc.weights) @ np.stack([s.center for s in sc.sets])
        lines.append(f"weighted mean of singletons: {_fmt(mean)}")
    if alt.cycle_detected:
        period = len(sc.sets)
        lines.append("limit cycle: " + " -> ".join(_fmt(p) for p in alt.iterates[-period:]))
    print("\n".join(lines))
    if args.svg:
        svg = pocs_paths([set_outline(s) for s in sc.sets],
                         {"alternating": np.array(alt.iterates), "parallel": np.array(par.iterates)},
                         *sc.bounds, title=f"POCS iterates: {args.scene}")
        Path(args.svg).write_text(svg)
    return 0


def cmd_datasets(args, parser) -> int:
    root = data_root()
    print(f"data root: {root}")
    for name, e in registry().items():
        path = e.path()
        present = path.is_file()
        line = f"{name:<12} {e.filename:<16} k={e.clusters:<3} n={e.instances:<5} {'present' if present else 'missing'}"
        if args.hash and present:
            line += f" sha256={sha256_of(path)}"
        print(line)
    return 0


COMMANDS = {
    "fit": cmd_fit,
    "bench": cmd_bench,
    "plot": cmd_plot,
    "demo-pocs": cmd_demo_pocs,
    "datasets": cmd_datasets,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args, args.subparser)
    except CliFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
