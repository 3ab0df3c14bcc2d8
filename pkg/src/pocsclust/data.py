"""Point-file loading, min-max normalization, and synthetic blobs."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import Dataset
from .errors import ConfigError, ParseError

DELIMITERS = ("whitespace", "comma")
DATA_DIR_ENV = "POCS_DATA_DIR"


@dataclass(frozen=True)
class RawTable:
    rows: np.ndarray
    source_path: str
    delimiter: str

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape


def _split(line: str, delimiter: str) -> list[str]:
    if delimiter == "comma":
        return [f.strip() for f in line.split(",")]
    return line.split()


def _parse_field(field: str) -> float:
    value = float(field)
    if not np.isfinite(value):
        raise ValueError(field)
    return value


def _detect(line: str) -> str:
    try:
        [_parse_field(f) for f in line.split()]
        return "whitespace"
    except ValueError:
        return "comma"


def parse_points(text: str, delimiter: Optional[str] = None, columns: Optional[Sequence[int]] = None,
                 source: str = "<string>") -> RawTable:
    """Parse point rows from `text`.

    One point per non-blank line. With ``delimiter=None`` the first data
    line decides: whitespace if it parses that way, comma otherwise.
    `columns` selects and orders fields after the arity check.
    """
    if delimiter is not None and delimiter not in DELIMITERS:
        raise ValueError(f"delimiter must be one of {DELIMITERS}")
    rows = []
    arity = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if delimiter is None:
            delimiter = _detect(line)
        fields = _split(line, delimiter)
        try:
            values = [_parse_field(f) for f in fields]
        except ValueError:
            bad = next(f for f in fields if not _is_number(f))
            raise ParseError(f"non-numeric field {bad!r}", lineno, source) from None
        if arity is None:
            arity = len(values)
        elif len(values) != arity:
            raise ParseError(f"expected {arity} fields, found {len(values)}", lineno, source)
        rows.append(values)
    if not rows:
        raise ParseError("no data rows", None, source)
    table = np.asarray(rows, dtype=float)
    if columns is not None:
        columns = list(columns)
        if not columns or any(c < -arity or c >= arity for c in columns):
            raise ParseError(f"column selection {columns} out of range for {arity} fields", None, source)
        table = table[:, columns]
    table.setflags(write=False)
    return RawTable(table, source, delimiter or "whitespace")


def _is_number(field: str) -> bool:
    try:
        _parse_field(field)
        return True
    except ValueError:
        return False


def load_dataset(path, delimiter: Optional[str] = None, columns: Optional[Sequence[int]] = None) -> RawTable:
    """Read a point file; raises `OSError` if unreadable, `ParseError` on bad content."""
    path = Path(path)
    text = path.read_text()
    return parse_points(text, delimiter, columns, str(path))


@dataclass(frozen=True)
class NormalizationSpec:
    lower: np.ndarray
    upper: np.ndarray

    @classmethod
    def from_points(cls, points: np.ndarray) -> "NormalizationSpec":
        return cls(points.min(axis=0), points.max(axis=0))

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def apply(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        span = self.span
        safe = np.where(span > 0, span, 1.0)
        return np.where(span > 0, (points - self.lower) / safe, 0.0)

    def invert(self, points) -> np.ndarray:
        """Map normalized coordinates back; constant dimensions return their single value."""
        return self.lower + np.asarray(points, dtype=float) * self.span


def normalize(table: RawTable, name: str = "") -> tuple[Dataset, NormalizationSpec]:
    """Min-max scale every dimension of `table` onto [0, 1].

    Constant dimensions map to 0.
    """
    spec = NormalizationSpec.from_points(table.rows)
    scaled = spec.apply(table.rows)
    # monotone rounding keeps (v - min) / (max - min) inside [0, 1]
    assert scaled.min() >= 0.0 and scaled.max() <= 1.0
    return Dataset(scaled, name), spec


def make_blobs(k: int, points_per_cluster: int, dim: int, spread: float, separation: float,
               seed: int) -> tuple[Dataset, np.ndarray]:
    """Isotropic Gaussian clusters around centers drawn in the unit cube.

    Centers are sampled by rejection until all pairs are at least
    `separation` apart; `ConfigError` if that cannot be achieved.
    """
    if min(k, points_per_cluster, dim) < 1:
        raise ConfigError("k, points_per_cluster and dim must be at least 1")
    if not (spread > 0 and separation > 0):
        raise ConfigError("spread and separation must be positive")
    if k > 1 and separation > np.sqrt(dim):
        raise ConfigError(f"separation {separation} exceeds the unit-cube diameter")
    rng = np.random.default_rng(seed)
    centers: list[np.ndarray] = []
    attempts = 0
    while len(centers) < k:
        attempts += 1
        if attempts > 1000 * k:
            raise ConfigError(f"could not place {k} centers {separation} apart in [0,1]^{dim}")
        c = rng.random(dim)
        if all(np.linalg.norm(c - o) >= separation for o in centers):
            centers.append(c)
    C = np.array(centers)
    pts = np.concatenate([c + spread * rng.standard_normal((points_per_cluster, dim)) for c in C])
    return Dataset(pts, f"blobs-k{k}-s{seed}"), C


# -- benchmark registry ----------------------------------------------------------


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    filename: str
    clusters: int
    attributes: int
    instances: int
    columns: Optional[tuple[int, ...]]
    sha256: Optional[str]

    def path(self, root=None) -> Path:
        return data_root(root) / self.filename


def data_root(root=None) -> Path:
    if root is not None:
        return Path(root)
    return Path(os.environ.get(DATA_DIR_ENV, "data"))


def registry() -> dict[str, RegistryEntry]:
    raw = json.loads(resources.files(__package__).joinpath("datasets.json").read_text())
    out = {}
    for name, e in raw["datasets"].items():
        cols = tuple(e["columns"]) if e.get("columns") is not None else None
        out[name] = RegistryEntry(name, e["file"], e["clusters"], e["attributes"], e["instances"],
                                  cols, e.get("sha256"))
    return out


def sha256_of(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def load_benchmark(name: str, root=None, verify: bool = True) -> tuple[Dataset, NormalizationSpec, RawTable]:
    """Load a registered benchmark file and normalize it.

    If the registry pins a checksum and `verify` is set, a mismatch raises
    `ParseError`.
    """
    entries = registry()
    if name not in entries:
        raise KeyError(f"unknown dataset {name!r}; known: {', '.join(entries)}")
    entry = entries[name]
    path = entry.path(root)
    if verify and entry.sha256 and sha256_of(path) != entry.sha256:
        raise ParseError("checksum mismatch against the dataset registry", None, str(path))
    table = load_dataset(path, columns=entry.columns)
    ds, spec = normalize(table, name)
    return ds, spec, table
