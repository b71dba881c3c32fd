"""Shared value objects: embeddings, distance matrices, persistence pairs."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import DegenerateCloud, NonFiniteInput, ShapeError, ZeroDiameter, ZeroNormRow

METRIC_NAMES = (
    "persistence0",
    "persistence1",
    "rankme",
    "alpha_req",
    "nesum",
    "stable_rank",
    "mu0_incoherence",
    "pc_number",
    "self_cluster",
)


class MetricKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    COSINE = "cosine"


def check_embedding(values) -> np.ndarray:
    """Validate an ``n x d`` embedding matrix and return it as C-ordered float64.

    A 1-D input is treated as a single row.
    """
    x = np.ascontiguousarray(values, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ShapeError(f"embedding must be 2-D, got shape {x.shape}")
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise ShapeError(f"embedding must have n >= 1 and d >= 1, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        bad = np.argwhere(~np.isfinite(x))[0]
        raise NonFiniteInput(f"non-finite entry at row {bad[0]}, column {bad[1]}")
    return x


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric ``n x n`` matrix of pairwise distances with zero diagonal."""

    values: np.ndarray
    kind: MetricKind = MetricKind.EUCLIDEAN

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ShapeError(f"distance matrix must be square, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteInput("distance matrix has non-finite entries")
        if np.any(v < 0) or np.any(np.diag(v) != 0) or not np.array_equal(v, v.T):
            raise ShapeError("distance matrix must be symmetric, nonnegative, zero on the diagonal")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "kind", MetricKind(self.kind))

    @property
    def n(self) -> int:
        return self.values.shape[0]


def pairwise_distances(emb, kind=MetricKind.EUCLIDEAN) -> DistanceMatrix:
    """Full pairwise distance matrix of the rows of ``emb``.

    Euclidean distances are computed from coordinate differences (never via the
    Gram-matrix identity) so that the result is exactly symmetric and invariant
    to row order. Cosine distance is ``1 - cos`` clamped into ``[0, 2]``.
    """
    x = check_embedding(emb)
    kind = MetricKind(kind)
    n = x.shape[0]
    if n == 1:
        return DistanceMatrix(np.zeros((1, 1)), kind)
    if kind is MetricKind.EUCLIDEAN:
        condensed = pdist(x, "euclidean")
    else:
        norms = np.linalg.norm(x, axis=1)
        if np.any(norms == 0):
            raise ZeroNormRow(f"row {int(np.argmin(norms))} has zero norm; cosine distance undefined")
        condensed = np.clip(pdist(x, "cosine"), 0.0, 2.0)
    return DistanceMatrix(squareform(condensed, checks=False), kind)


def diameter(dm: DistanceMatrix) -> float:
    """Largest pairwise distance. Raises ``ZeroDiameter`` when all points coincide."""
    if dm.n < 2:
        raise DegenerateCloud("diameter needs at least 2 points")
    value = float(dm.values.max())
    if value == 0.0:
        raise ZeroDiameter("all points coincide; the diameter is 0")
    return value


class PersistencePair(NamedTuple):
    birth: float
    death: float
    dimension: int

    @property
    def length(self) -> float:
        return self.death - self.birth


@dataclass(frozen=True)
class PersistenceDiagram:
    """Finite (birth, death) pairs of one homology dimension.

    ``intervals`` is an ``m x 2`` float array; essential (infinite) bars are not
    stored, only counted in ``essential_count``.
    """

    dimension: int
    intervals: np.ndarray
    diameter: float
    essential_count: int = 0

    def __post_init__(self):
        iv = np.asarray(self.intervals, dtype=np.float64).reshape(-1, 2)
        iv.setflags(write=False)
        object.__setattr__(self, "intervals", iv)

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self) -> Iterator[PersistencePair]:
        for b, d in self.intervals:
            yield PersistencePair(float(b), float(d), self.dimension)

    @property
    def pairs(self) -> list[PersistencePair]:
        return list(self)

    @property
    def lengths(self) -> np.ndarray:
        return self.intervals[:, 1] - self.intervals[:, 0]

    def sorted_intervals(self) -> np.ndarray:
        """Intervals in lexicographic (birth, death) order, for multiset comparison."""
        iv = self.intervals
        return iv[np.lexsort((iv[:, 1], iv[:, 0]))]


@dataclass
class MetricReport:
    """Named metric values for one embedding, plus the provenance needed to redo them."""

    values: dict[str, float] = field(default_factory=dict)
    subsample_size: int | None = None
    seed: int | None = None
    metric_kind: MetricKind = MetricKind.EUCLIDEAN
    n_points: int | None = None
    n_used: int | None = None
    dim: int | None = None

    def __getitem__(self, name: str) -> float:
        return self.values[name]

    def update(self, other: "MetricReport") -> None:
        self.values.update(other.values)
        for attr in ("subsample_size", "seed", "n_points", "n_used", "dim"):
            if getattr(other, attr) is not None:
                setattr(self, attr, getattr(other, attr))

    def to_dict(self) -> dict:
        ordered = {k: self.values[k] for k in METRIC_NAMES if k in self.values}
        ordered.update({k: v for k, v in self.values.items() if k not in ordered})
        return {
            "metrics": ordered,
            "provenance": {
                "metric_kind": MetricKind(self.metric_kind).value,
                "n_points": self.n_points,
                "n_used": self.n_used,
                "dim": self.dim,
                "subsample_size": self.subsample_size,
                "seed": self.seed,
            },
        }
