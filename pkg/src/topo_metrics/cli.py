"""Command-line entry point: ``topo-metrics {compute,evaluate,scaling,synth}``.

Exit codes: 0 success, 1 bad input (arguments, files, formats), 2 a metric
could not be computed on otherwise valid input.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

from . import __version__
from .core import METRIC_NAMES, MetricKind, MetricReport
from .errors import ComputationError, InputError
from .harness import evaluate, scaling_experiment
from .homology import DEFAULT_SUBSAMPLE, persistence_metric
from .io import EmbeddingFormat, EvalConfig, Shape, dump_report, load_embeddings, load_runs, save_embeddings, synth_cloud, write_report
from .parallel import worker_count
from .spectral import spectral_report

EXIT_OK, EXIT_INPUT, EXIT_COMPUTE = 0, 1, 2


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _name_list(text: str) -> list[str]:
    names = [v.strip() for v in text.split(",") if v.strip()]
    unknown = [n for n in names if n not in METRIC_NAMES]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown metrics {unknown}; choose from {', '.join(METRIC_NAMES)}")
    return names


def _emit(obj, output) -> None:
    if output is None:
        sys.stdout.write(dump_report(obj).decode("utf-8"))
    else:
        write_report(output, obj)


def compute_report(emb, metrics, kind, subsample, seed, use_oracle=False) -> MetricReport:
    """Evaluate the requested metrics, persistence and spectral groups in parallel."""
    dims = tuple(int(m[-1]) for m in metrics if m.startswith("persistence"))
    spectral = [m for m in metrics if not m.startswith("persistence")]
    jobs = []
    if dims:
        jobs.append(lambda: persistence_metric(emb, dims, subsample, seed, kind, use_oracle=use_oracle))
    if spectral:
        jobs.append(lambda: MetricReport(values=spectral_report(emb, spectral)))
    if worker_count() > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=len(jobs)) as pool:
            parts = list(pool.map(lambda job: job(), jobs))
    else:
        parts = [job() for job in jobs]
    report = MetricReport(
        subsample_size=subsample, seed=seed, metric_kind=MetricKind(kind),
        n_points=emb.shape[0], n_used=emb.shape[0], dim=emb.shape[1],
    )
    for part in parts:
        report.update(part)
    report.values = {m: report.values[m] for m in metrics}
    return report


def cmd_compute(args) -> int:
    if args.subsample < 0:
        raise UsageError(f"--subsample must be >= 0, got {args.subsample}")
    emb = load_embeddings(args.input, args.format)
    subsample = args.subsample if args.subsample > 0 else None
    report = compute_report(emb, args.metrics, args.distance, subsample, args.seed, args.oracle)
    _emit(report.to_dict(), args.output)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = EvalConfig.load(args.config)
    table = load_runs(args.runs, config)
    summary = evaluate(table, config.metrics, config.tasks, config.aggregate)
    _emit(summary.to_dict(), args.output)
    return EXIT_OK


def cmd_scaling(args) -> int:
    grid = args.n_grid
    if len(grid) < 2 or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 2:
        raise UsageError(f"--n-grid needs at least 2 strictly increasing sizes >= 2, got {grid}")
    if args.trials < 1 or any(d < 1 for d in args.dims):
        raise UsageError("--trials and every entry of --dims must be positive")
    fits = [scaling_experiment(d, grid, args.trials, args.seed).to_dict() for d in args.dims]
    _emit({"seed": args.seed, "trials": args.trials, "fits": fits}, args.output)
    return EXIT_OK


def cmd_synth(args) -> int:
    x = synth_cloud(args.shape, args.n, args.d, args.noise, args.clusters, args.seed)
    save_embeddings(args.output, x, args.format)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="topo-metrics", description="Label-free embedding quality metrics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("compute", help="compute metrics for one embedding file")
    p.add_argument("--input", required=True)
    p.add_argument("--format", choices=[f.value for f in EmbeddingFormat], default=None)
    p.add_argument("--metrics", type=_name_list, default=list(METRIC_NAMES))
    p.add_argument("--distance", choices=[k.value for k in MetricKind], default="euclidean")
    p.add_argument("--subsample", type=int, default=DEFAULT_SUBSAMPLE,
                   help="max points for persistence metrics; 0 disables subsampling")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.add_argument("--oracle", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_compute)

    p = sub.add_parser("evaluate", help="correlate metrics with downstream scores")
    p.add_argument("--runs", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("scaling", help="fit the H0 persistence growth exponent on uniform cubes")
    p.add_argument("--dims", type=_int_list, default=[2, 3])
    p.add_argument("--n-grid", type=_int_list, default=[100, 200, 400, 800, 1600])
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output")
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("synth", help="write a synthetic point cloud")
    p.add_argument("--shape", choices=[s.value for s in Shape], required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--clusters", type=int, default=3)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=[f.value for f in EmbeddingFormat], default=None)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ComputationError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
