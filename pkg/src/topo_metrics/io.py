"""Embedding files, run manifests, synthetic clouds and report writing.

Binary embedding layout (all little-endian)::

    bytes 0-7    b"EMBMAT01"
    bytes 8-11   rows  (uint32)
    bytes 12-15  cols  (uint32)
    bytes 16-    rows * cols float64, row-major
"""

from __future__ import annotations

import csv
import enum
import json
import math
import os
import struct
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import check_embedding
from .errors import BadParams, MissingColumn, NonFiniteValue, ParseError, ShapeError
from .harness import Aggregate, CorrelationMode, Orientation, RunRecord, RunTable

MAGIC = b"EMBMAT01"
HEADER = struct.Struct("<8sII")


class EmbeddingFormat(str, enum.Enum):
    CSV = "csv"
    BINARY = "bin"


def _parse_float(text: str) -> float | None:
    try:
        return float(text)
    except ValueError:
        return None


def _read_csv(path: Path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(f.strip() for f in row)]
    if not rows:
        raise ShapeError(f"{path}: no data rows")
    if all(_parse_float(f) is None for f in rows[0]):
        rows = rows[1:]
        first_line = 2
    else:
        first_line = 1
    if not rows:
        raise ShapeError(f"{path}: header but no data rows")
    width = len(rows[0])
    out = np.empty((len(rows), width), dtype=np.float64)
    for i, row in enumerate(rows):
        line = first_line + i
        if len(row) != width:
            raise ShapeError(f"{path}: row {line} has {len(row)} fields, expected {width}")
        for j, f in enumerate(row):
            value = _parse_float(f)
            if value is None:
                raise ParseError(f"{path}: cannot parse {f!r} as a number", row=line, column=j + 1)
            if not math.isfinite(value):
                raise NonFiniteValue(f"{path}: non-finite value {f!r} at row {line}, column {j + 1}")
            out[i, j] = value
    return out


def _read_binary(path: Path) -> np.ndarray:
    data = path.read_bytes()
    if len(data) < HEADER.size:
        raise ParseError(f"{path}: file shorter than the {HEADER.size}-byte header")
    magic, rows, cols = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ParseError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    expected = HEADER.size + 8 * rows * cols
    if len(data) != expected:
        raise ShapeError(f"{path}: length {len(data)} bytes, header implies {expected}")
    values = np.frombuffer(data, dtype="<f8", offset=HEADER.size).astype(np.float64).reshape(rows, cols)
    if not np.all(np.isfinite(values)):
        r, c = np.argwhere(~np.isfinite(values))[0]
        raise NonFiniteValue(f"{path}: non-finite value at row {r + 1}, column {c + 1}")
    return values


def load_embeddings(path, fmt=None) -> np.ndarray:
    """Read an embedding matrix. ``fmt`` defaults from the file suffix (``.bin`` or CSV)."""
    path = Path(path)
    if fmt is None:
        fmt = EmbeddingFormat.BINARY if path.suffix == ".bin" else EmbeddingFormat.CSV
    fmt = EmbeddingFormat(fmt)
    values = _read_binary(path) if fmt is EmbeddingFormat.BINARY else _read_csv(path)
    return check_embedding(values)


def atomic_write(path, data: bytes) -> None:
    """Write ``data`` to a temp file next to ``path`` and rename it into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def embeddings_to_bytes(emb, fmt) -> bytes:
    x = check_embedding(emb)
    if EmbeddingFormat(fmt) is EmbeddingFormat.BINARY:
        rows, cols = x.shape
        return HEADER.pack(MAGIC, rows, cols) + x.astype("<f8").tobytes(order="C")
    lines = [",".join(format(v, ".17g") for v in row) for row in x.tolist()]
    return ("\n".join(lines) + "\n").encode("ascii")


def save_embeddings(path, emb, fmt=None) -> None:
    path = Path(path)
    if fmt is None:
        fmt = EmbeddingFormat.BINARY if path.suffix == ".bin" else EmbeddingFormat.CSV
    atomic_write(path, embeddings_to_bytes(emb, fmt))


def dump_report(obj) -> bytes:
    """Canonical JSON encoding used for every report file."""
    return (json.dumps(obj, indent=2, allow_nan=False) + "\n").encode("utf-8")


def write_report(path, obj) -> None:
    atomic_write(path, dump_report(obj))


class Shape(str, enum.Enum):
    CIRCLE = "circle"
    UNIFORM_CUBE = "cube"
    GAUSSIAN_CLUSTERS = "clusters"


def synth_cloud(shape, n: int, d: int, noise: float = 0.0, clusters: int = 3, seed: int = 0) -> np.ndarray:
    """Seeded synthetic point cloud.

    ``circle``: ``n`` equally spaced points on the unit circle in the first two
    coordinates plus isotropic Gaussian noise. ``cube``: uniform in ``[0, 1]^d``.
    ``clusters``: centers uniform in the cube, points ``center + noise * N(0, I)``
    split as evenly as possible.
    """
    shape = Shape(shape)
    if n < 1 or d < 1:
        raise BadParams(f"n and d must be positive, got n={n}, d={d}")
    if noise < 0 or not math.isfinite(noise):
        raise BadParams(f"noise must be finite and >= 0, got {noise}")
    rng = np.random.default_rng(seed)
    if shape is Shape.CIRCLE:
        if d < 2:
            raise BadParams("circle needs d >= 2")
        angles = 2.0 * np.pi * np.arange(n) / n
        x = np.zeros((n, d))
        x[:, 0] = np.cos(angles)
        x[:, 1] = np.sin(angles)
        if noise > 0:
            x += noise * rng.standard_normal((n, d))
        return x
    if shape is Shape.UNIFORM_CUBE:
        return rng.uniform(size=(n, d))
    if clusters < 1 or clusters > n:
        raise BadParams(f"clusters must be in [1, n], got {clusters}")
    centers = rng.uniform(size=(clusters, d))
    labels = np.arange(n) * clusters // n
    return centers[labels] + noise * rng.standard_normal((n, d))


@dataclass
class EvalConfig:
    """Sidecar configuration for a runs manifest (JSON object).

    Keys: ``metrics`` and ``tasks`` (lists of column names), ``orientation``
    (metric -> "higher"/"lower", default higher), ``correlation_mode``
    ("signed"/"absolute"), ``aggregate`` ("mean"/"sum"), ``delimiter``.
    """

    metrics: list[str]
    tasks: list[str]
    orientation: dict[str, Orientation] = field(default_factory=dict)
    correlation_mode: CorrelationMode = CorrelationMode.SIGNED
    aggregate: Aggregate = Aggregate.MEAN
    delimiter: str = ","

    KEYS = ("metrics", "tasks", "orientation", "correlation_mode", "aggregate", "delimiter")

    @classmethod
    def from_dict(cls, raw) -> "EvalConfig":
        if not isinstance(raw, dict):
            raise ParseError("config must be a JSON object")
        unknown = set(raw) - set(cls.KEYS)
        if unknown:
            raise ParseError(f"unknown config keys: {sorted(unknown)}")
        for key in ("metrics", "tasks"):
            value = raw.get(key)
            if not isinstance(value, list) or not value or not all(isinstance(v, str) for v in value):
                raise ParseError(f"config {key!r} must be a nonempty list of column names")
        if set(raw["metrics"]) & set(raw["tasks"]):
            raise ParseError("a column cannot be both a metric and a task")
        try:
            orientation = {k: Orientation(v) for k, v in raw.get("orientation", {}).items()}
            mode = CorrelationMode(raw.get("correlation_mode", "signed"))
            aggregate = Aggregate(raw.get("aggregate", "mean"))
        except (ValueError, AttributeError) as exc:
            raise ParseError(f"bad config value: {exc}") from None
        stray = set(orientation) - set(raw["metrics"])
        if stray:
            raise ParseError(f"orientation given for non-metric columns: {sorted(stray)}")
        delimiter = raw.get("delimiter", ",")
        if not isinstance(delimiter, str) or len(delimiter) != 1:
            raise ParseError("delimiter must be a single character")
        return cls(list(raw["metrics"]), list(raw["tasks"]), orientation, mode, aggregate, delimiter)

    @classmethod
    def load(cls, path) -> "EvalConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc.msg})", row=exc.lineno, column=exc.colno) from None
        return cls.from_dict(raw)


def load_runs(path, config: EvalConfig) -> RunTable:
    """Read a runs manifest: header row with ``run_id`` plus numeric columns."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh, delimiter=config.delimiter) if row]
    if not rows:
        raise ParseError(f"{path}: empty manifest")
    header = [h.strip() for h in rows[0]]
    if len(set(header)) != len(header):
        raise ParseError(f"{path}: duplicate column names in header")
    if "run_id" not in header:
        raise MissingColumn(f"{path}: no run_id column")
    for name in config.metrics + config.tasks:
        if name not in header:
            raise MissingColumn(f"{path}: column {name!r} named in config is missing")
    id_col = header.index("run_id")
    records = []
    seen = set()
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ShapeError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
        run_id = row[id_col].strip()
        if run_id in seen:
            raise ParseError(f"{path}: duplicate run_id {run_id!r}", row=i)
        seen.add(run_id)
        values = {}
        for j, name in enumerate(header):
            if name not in config.metrics and name not in config.tasks:
                continue
            value = _parse_float(row[j])
            if value is None:
                raise ParseError(f"{path}: cannot parse {row[j]!r} as a number", row=i, column=j + 1)
            if not math.isfinite(value):
                raise NonFiniteValue(f"{path}: non-finite {name} at row {i}")
            values[name] = value
        records.append(
            RunRecord(
                run_id,
                {m: values[m] for m in config.metrics},
                {t: values[t] for t in config.tasks},
            )
        )
    return RunTable(records, dict(config.orientation), config.correlation_mode)
