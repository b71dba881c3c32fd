"""Correlation and model-selection protocol for unsupervised metrics.

Given a table of runs (each with unsupervised metric values and downstream
scores), report how well each metric tracks each downstream task and how good
the run it would pick actually is. Also hosts the H0 scaling experiment on
uniform samples from the unit cube.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .errors import BadParams, LengthMismatch, MissingColumn, NonFiniteValue, ZeroVariance, AllTied
from .homology import diagrams, total_persistence
from .core import pairwise_distances
from .parallel import worker_count


class Orientation(str, enum.Enum):
    HIGHER_BETTER = "higher"
    LOWER_BETTER = "lower"


class CorrelationMode(str, enum.Enum):
    SIGNED = "signed"
    ABSOLUTE = "absolute"


class Aggregate(str, enum.Enum):
    MEAN = "mean"
    SUM = "sum"


TOTAL_TASK = "total"


@dataclass
class RunRecord:
    run_id: str
    unsup: dict[str, float]
    downstream: dict[str, float]

    def __post_init__(self):
        for name, value in {**self.unsup, **self.downstream}.items():
            if not math.isfinite(value):
                raise NonFiniteValue(f"run {self.run_id!r}: {name} is not finite")


@dataclass
class RunTable:
    records: list[RunRecord]
    orientation: dict[str, Orientation] = field(default_factory=dict)
    correlation_mode: CorrelationMode = CorrelationMode.SIGNED

    def orientation_of(self, metric: str) -> Orientation:
        return Orientation(self.orientation.get(metric, Orientation.HIGHER_BETTER))

    def metric_column(self, metric: str) -> np.ndarray:
        try:
            return np.array([r.unsup[metric] for r in self.records], dtype=np.float64)
        except KeyError:
            raise MissingColumn(f"metric {metric!r} missing from at least one run") from None

    def task_column(self, task: str) -> np.ndarray:
        if task == TOTAL_TASK and not all(TOTAL_TASK in r.downstream for r in self.records):
            raise MissingColumn("no composite task; use a sum-aggregated evaluation")
        try:
            return np.array([r.downstream[task] for r in self.records], dtype=np.float64)
        except KeyError:
            raise MissingColumn(f"task {task!r} missing from at least one run") from None

    def with_total(self, tasks) -> "RunTable":
        """Copy with an extra downstream column holding the per-run sum of ``tasks``."""
        records = []
        for r in self.records:
            try:
                total = math.fsum(r.downstream[t] for t in tasks)
            except KeyError as exc:
                raise MissingColumn(f"task {exc.args[0]!r} missing from run {r.run_id!r}") from None
            records.append(RunRecord(r.run_id, dict(r.unsup), {**r.downstream, TOTAL_TASK: total}))
        return RunTable(records, dict(self.orientation), self.correlation_mode)


def _check_pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"need two equal-length sequences, got {x.shape} and {y.shape}")
    if len(x) < 3:
        raise LengthMismatch(f"need at least 3 observations, got {len(x)}")
    return x, y


def pearson(x, y) -> float:
    """Sample Pearson correlation."""
    x, y = _check_pair(x, y)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("correlation undefined for a constant sequence")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman(x, y) -> float:
    """Pearson correlation of average ranks (ties share their mean rank)."""
    x, y = _check_pair(x, y)
    for v in (x, y):
        if np.all(v == v[0]):
            raise AllTied("rank correlation undefined when every value is tied")
    return pearson(rankdata(x, method="average"), rankdata(y, method="average"))


def select_run(table: RunTable, metric: str) -> RunRecord:
    """Run preferred by ``metric``; ties go to the smallest run_id."""
    values = table.metric_column(metric)
    sign = 1.0 if table.orientation_of(metric) is Orientation.HIGHER_BETTER else -1.0
    best = max(sign * values)
    tied = [r for r, v in zip(table.records, values) if sign * v == best]
    return min(tied, key=lambda r: r.run_id)


def selection_quality(table: RunTable, metric: str, task: str) -> float:
    """Downstream score of the run that ``metric`` alone would select."""
    table.task_column(task)
    return float(select_run(table, metric).downstream[task])


@dataclass(frozen=True)
class Cell:
    pearson: float
    spearman: float
    selection_quality: float
    best_possible: float


@dataclass
class MetricSummary:
    metric: str
    orientation: Orientation
    cells: dict[str, Cell]
    mean_pearson: float
    mean_spearman: float
    mean_quality: float


@dataclass
class EvaluationSummary:
    correlation_mode: CorrelationMode
    aggregate: Aggregate
    tasks: list[str]
    metrics: list[MetricSummary]

    def cell(self, metric: str, task: str) -> Cell:
        for m in self.metrics:
            if m.metric == metric:
                return m.cells[task]
        raise MissingColumn(f"metric {metric!r} not in summary")

    def ranked(self) -> list[MetricSummary]:
        """Metrics sorted by mean Spearman, best first (ties by name)."""
        return sorted(self.metrics, key=lambda m: (-m.mean_spearman, m.metric))

    def to_dict(self) -> dict:
        return {
            "correlation_mode": self.correlation_mode.value,
            "aggregate": self.aggregate.value,
            "tasks": list(self.tasks),
            "metrics": [
                {
                    "metric": m.metric,
                    "orientation": m.orientation.value,
                    "mean": {
                        "pearson": m.mean_pearson,
                        "spearman": m.mean_spearman,
                        "selection_quality": m.mean_quality,
                    },
                    "cells": {
                        task: {
                            "pearson": c.pearson,
                            "spearman": c.spearman,
                            "selection_quality": c.selection_quality,
                            "best_possible": c.best_possible,
                        }
                        for task, c in m.cells.items()
                    },
                }
                for m in self.ranked()
            ],
        }


def evaluate(table: RunTable, metrics, tasks, aggregate=Aggregate.MEAN) -> EvaluationSummary:
    """Correlations and selection quality for every (metric, task) pair.

    ``aggregate="mean"`` averages the per-task cells into the per-metric
    summary. ``aggregate="sum"`` adds a composite ``total`` task (per-run sum
    of all tasks) and the per-metric summary is that composite's cell.
    """
    aggregate = Aggregate(aggregate)
    tasks = list(tasks)
    metrics = list(metrics)
    if not metrics or not tasks:
        raise BadParams("need at least one metric and one task")
    if len(table.records) < 3:
        raise LengthMismatch(f"need at least 3 runs, got {len(table.records)}")
    if aggregate is Aggregate.SUM:
        if TOTAL_TASK in tasks:
            raise BadParams(f"task name {TOTAL_TASK!r} is reserved for sum aggregation")
        table = table.with_total(tasks)
    columns = tasks + ([TOTAL_TASK] if aggregate is Aggregate.SUM else [])
    absolute = table.correlation_mode is CorrelationMode.ABSOLUTE

    summaries = []
    for metric in metrics:
        x = table.metric_column(metric)
        cells = {}
        for task in columns:
            y = table.task_column(task)
            p, s = pearson(x, y), spearman(x, y)
            if absolute:
                p, s = abs(p), abs(s)
            cells[task] = Cell(p, s, selection_quality(table, metric, task), float(y.max()))
        if aggregate is Aggregate.SUM:
            head = cells[TOTAL_TASK]
            means = (head.pearson, head.spearman, head.selection_quality)
        else:
            per_task = [cells[t] for t in tasks]
            means = tuple(
                math.fsum(getattr(c, f) for c in per_task) / len(per_task)
                for f in ("pearson", "spearman", "selection_quality")
            )
        summaries.append(MetricSummary(metric, table.orientation_of(metric), cells, *means))
    return EvaluationSummary(table.correlation_mode, aggregate, tasks, summaries)


@dataclass(frozen=True)
class ScalingFitResult:
    dimension_d: int
    sample_sizes: list[int]
    mean_persistence0: list[float]
    fitted_exponent: float
    expected_exponent: float
    alpha_estimate: float

    def to_dict(self) -> dict:
        return {
            "d": self.dimension_d,
            "fitted_exponent": self.fitted_exponent,
            "expected_exponent": self.expected_exponent,
            "alpha_estimate": self.alpha_estimate,
            "sample_sizes": list(self.sample_sizes),
            "mean_persistence0": list(self.mean_persistence0),
        }


def _cube_persistence0(d: int, n: int, seed_seq: np.random.SeedSequence) -> float:
    x = np.random.default_rng(seed_seq).uniform(size=(n, d))
    return total_persistence(diagrams(pairwise_distances(x), dims=(0,))[0]).value


def scaling_experiment(d: int, sample_sizes, trials: int, seed: int, workers: int | None = None) -> ScalingFitResult:
    """Fit the growth exponent of mean H0 persistence in ``n`` for the unit ``d``-cube.

    Each (size, trial) draw gets its own child of ``SeedSequence([seed, d])``,
    so results do not depend on scheduling. The fit is ordinary least squares
    of ``log mean`` on ``log n``; ``alpha_estimate`` is ``exp(intercept)``.
    """
    sizes = [int(n) for n in sample_sizes]
    if d < 1:
        raise BadParams(f"dimension must be >= 1, got {d}")
    if trials < 1:
        raise BadParams(f"trials must be >= 1, got {trials}")
    if len(sizes) < 2 or any(b <= a for a, b in zip(sizes, sizes[1:])) or sizes[0] < 2:
        raise BadParams(f"need >= 2 strictly increasing sample sizes >= 2, got {sizes}")

    children = np.random.SeedSequence([seed, d]).spawn(len(sizes) * trials)
    jobs = [(n, children[i * trials + t]) for i, n in enumerate(sizes) for t in range(trials)]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(lambda job: _cube_persistence0(d, *job), jobs))
    else:
        values = [_cube_persistence0(d, *job) for job in jobs]

    means = [math.fsum(values[i * trials:(i + 1) * trials]) / trials for i in range(len(sizes))]
    slope, intercept = np.polyfit(np.log(sizes), np.log(means), 1)
    return ScalingFitResult(
        dimension_d=d,
        sample_sizes=sizes,
        mean_persistence0=means,
        fitted_exponent=float(slope),
        expected_exponent=1.0 - 1.0 / d,
        alpha_estimate=float(math.exp(intercept)),
    )
