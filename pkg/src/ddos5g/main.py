"""
Command-line entry point for ddos5g.

Subcommands:
    generate  write a synthetic flow CSV
    run       run the full pipeline from a config file
    score     reload a finished run's models and rescore its test sets
    inspect   print label counts and the class-share table of flow CSVs

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, NoReturn, Optional, Sequence

import pandas as pd

from .analysis.report import METRICS, RunManifest, load_manifest
from .config import Mode, load_config
from .data.ingest import (
    DEFAULT_LABEL_COLUMN,
    class_distribution,
    label_counts,
    load_csv,
    merge,
    port_histogram,
    write_csv,
)
from .data.synthgen import balanced_spec, generate, reference_distribution_spec
from .data.tabular import FeatureTable, filter_rows
from .exceptions import ConfigError, Ddos5gError, StageError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code instead of argparse's 2."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def setup_logging(verbose: bool = False) -> None:
    """
    Attach a console handler to the package logger.

    Args:
        verbose: DEBUG when true, WARNING otherwise
    """
    root = logging.getLogger("ddos5g")
    for handler in list(root.handlers):
        if getattr(handler, "_ddos5g_cli", False):
            root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(
        logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s", "%H:%M:%S")
    )
    handler._ddos5g_cli = True  # type: ignore[attr-defined]
    root.addHandler(handler)
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)


def scores_frame(manifest: RunManifest) -> pd.DataFrame:
    """One row per (task, model) with the four macro scores."""
    rows = [
        {"task": r.task, "model": r.model, **{m: getattr(r.scores, m) for m in METRICS}}
        for r in manifest.results
    ]
    return pd.DataFrame(rows, columns=["task", "model", *METRICS])


def _print_scores(manifest: RunManifest) -> None:
    frame = scores_frame(manifest)
    for task in dict.fromkeys(frame["task"]):
        print(f"\n📊 Task: {task}")
        print(
            frame[frame["task"] == task]
            .drop(columns="task")
            .to_string(index=False, float_format=lambda v: f"{v:.4f}")
        )


def cmd_generate(args: argparse.Namespace) -> int:
    """Write a synthetic flow CSV (one file, or one per label)."""
    if args.rows_per_class is not None:
        labels = args.labels or sorted(reference_distribution_spec().rows_per_class)
        spec = balanced_spec(labels, args.rows_per_class, seed=args.seed, separability=args.separability)
        spec.fault_fraction = args.fault_fraction
    else:
        spec = reference_distribution_spec(
            args.divisor, args.seed, args.separability, args.fault_fraction
        )
        if args.labels:
            keep = set(args.labels)
            spec.rows_per_class = {k: v for k, v in spec.rows_per_class.items() if k in keep}

    print(f"🚀 Generating synthetic flows (seed={args.seed})")
    table = generate(spec, n_jobs=args.threads)
    print(f"✅ Generated {table.n_rows} rows over {len(spec.rows_per_class)} labels")

    out = Path(args.out)
    if args.per_label:
        labels = table.strings(DEFAULT_LABEL_COLUMN)
        for label in sorted(set(labels)):
            part = filter_rows(table, [v == label for v in labels])
            path = write_csv(part, out / f"{label}.csv")
            print(f"   {label}: {part.n_rows} rows -> {path}")
    else:
        path = write_csv(table, out)
        print(f"📁 Wrote {path}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    """Run the pipeline."""
    from .pipeline import execute

    if args.config is None:
        args.parser.print_usage(sys.stderr)
        print("❌ run needs a config file: ddos5g run --config CONFIG.json", file=sys.stderr)
        return EXIT_USAGE

    overrides = list(args.set or [])
    if args.replication:
        overrides.append(f"mode={Mode.REPLICATION}")
    if args.threads is not None:
        overrides.append(f"n_jobs={args.threads}")
    cfg = load_config(args.config, overrides)
    out_dir = args.output_dir or cfg.output_dir

    print(f"🚀 Starting DDoS/5G pipeline (mode={cfg.mode}, seed={cfg.seed})")
    print("=" * 50)
    run = execute(cfg, out_dir)
    manifest = run.manifest

    _print_scores(manifest)
    for message in manifest.warnings:
        print(f"⚠️  {message}")
    print(f"\n✅ Wrote {len(run.written)} files to {out_dir}")
    print(f"🎉 Run complete! {len(manifest.results)} model/task results.")
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    """Rescore saved models; a mismatch against the results file is a runtime failure."""
    from .pipeline import score_saved

    run_dir = Path(args.run_dir)
    manifest = load_manifest(run_dir / "results.json")
    print(f"🔍 Rescoring saved models in {run_dir}")
    rescored = RunManifest(results=score_saved(run_dir))
    _print_scores(rescored)

    mismatched = [
        (new.task, new.model)
        for old, new in zip(manifest.results, rescored.results)
        if old.scores != new.scores
    ]
    if mismatched:
        for task, model in mismatched:
            print(f"❌ {model} on {task}: scores differ from results.json")
        return EXIT_RUNTIME
    print("\n✅ All scores match results.json")
    return EXIT_OK


def _load_tables(paths: Sequence[str], label_column: str) -> FeatureTable:
    tables = [load_csv(p, label_column=label_column) for p in paths]
    return tables[0] if len(tables) == 1 else merge(tables)


def cmd_inspect(args: argparse.Namespace) -> int:
    """Print label counts and shares."""
    table = _load_tables(args.paths, args.label_column)
    counts = label_counts(table, args.label_column)
    print(f"📊 {table.n_rows} rows, {len(counts)} labels")
    dist = class_distribution(table, args.label_column)
    print(
        dist.to_string(
            index=False,
            formatters={"Share": lambda v: f"{100 * v:.4f}%"},
        )
    )

    if args.ports:
        for column in ("Source Port", "Destination Port"):
            if table.has_column(column):
                print(f"\n📊 {column} histogram")
                print(port_histogram(table, column, args.label_column).to_string())

    if args.chart:
        from .utils import plotting

        if not plotting.MATPLOTLIB_AVAILABLE:
            print("⚠️  Matplotlib not available. Skipping chart.")
            print("   Install with: pip install ddos5g[plotting]")
        else:
            plotting.plot_class_distribution(counts, save_path=args.chart)
            print(f"📁 Wrote {args.chart}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="ddos5g",
        description="ddos5g - DDoS attack and 5G latency-quality classification",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")
    subparsers = parser.add_subparsers(dest="command")

    gen = subparsers.add_parser("generate", help="Write a synthetic flow CSV")
    gen.add_argument("--out", required=True, help="CSV path, or a directory with --per-label")
    gen.add_argument("--seed", type=int, default=0, help="Generation seed (default: 0)")
    gen.add_argument(
        "--divisor",
        type=int,
        default=100,
        help="Scale the reference label counts down by this factor (default: 100)",
    )
    gen.add_argument("--rows-per-class", type=int, help="Balanced classes of this size instead")
    gen.add_argument("--labels", nargs="+", help="Only these labels")
    gen.add_argument("--separability", type=float, default=1.0, help="0 (noise) to 1 (default)")
    gen.add_argument("--fault-fraction", type=float, default=0.0, help="Planted NaN/inf rate")
    gen.add_argument("--per-label", action="store_true", help="Write one CSV per label")
    gen.add_argument("--threads", type=int, default=1, help="Worker count (default: 1)")
    gen.set_defaults(handler=cmd_generate)

    run = subparsers.add_parser("run", help="Run the full pipeline")
    run.add_argument("--config", help="Pipeline config JSON")
    run.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="Override a config field, e.g. --set featsel.k_best=30 (repeatable)",
    )
    run.add_argument(
        "--replication",
        action="store_true",
        help="Oversample and scale before splitting (leaks test data; for comparison only)",
    )
    run.add_argument("--output-dir", help="Output directory (overrides config and environment)")
    run.add_argument("--threads", type=int, help="Worker cap for parallel stages")
    run.set_defaults(handler=cmd_run, parser=run)

    score = subparsers.add_parser("score", help="Rescore a finished run")
    score.add_argument("run_dir", help="Output directory of a previous run")
    score.set_defaults(handler=cmd_score)

    inspect = subparsers.add_parser("inspect", help="Label counts and class shares")
    inspect.add_argument("paths", nargs="+", help="Flow CSV files")
    inspect.add_argument("--label-column", default=DEFAULT_LABEL_COLUMN)
    inspect.add_argument("--ports", action="store_true", help="Also print port histograms")
    inspect.add_argument("--chart", help="Write a class-distribution SVG here")
    inspect.set_defaults(handler=cmd_inspect)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point for the application.

    Returns:
        Process exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    setup_logging(args.verbose)

    try:
        return int(args.handler(args))
    except ConfigError as exc:
        print(f"❌ Configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"❌ {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc.cause, ConfigError) else EXIT_RUNTIME
    except (Ddos5gError, OSError, ValueError, KeyError) as exc:
        print(f"❌ {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
