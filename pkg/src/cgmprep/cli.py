"""Command-line entry point.

Each subcommand runs one pipeline stage from the previous stage's
artifacts; ``all`` runs the whole chain. ``make-fixture`` writes the
bundled synthetic cohort plus a ready-to-run config.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import ConfigError, PipelineConfig, load_config, write_default_config
from .pipeline import (
    StageError,
    load_series_dir,
    compute_labels,
    run_pipeline,
    stage_analyze,
    stage_clean,
    stage_impute,
    stage_ingest,
    stage_label,
    stage_windows,
)

logger = logging.getLogger("cgmprep")

STAGES = ("ingest", "clean", "impute", "label", "windows", "analyze", "all")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cgmprep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in STAGES:
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "all" else "run every stage")
        p.add_argument("--config", type=Path, required=True, help="pipeline config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--raw-mode", action="store_true", help="skip quality and imputation")
        p.add_argument("--out", type=Path, default=None, help="override the output directory")

    fx = sub.add_parser("make-fixture", help="generate the synthetic demo cohort")
    fx.add_argument("--out", type=Path, required=True, help="directory for fixture CSV and config")
    fx.add_argument("--subjects", type=int, default=5)
    fx.add_argument("--days", type=int, default=7)
    fx.add_argument("--seed", type=int, default=20240801)
    return parser


def _load(args) -> PipelineConfig:
    config = load_config(args.config)
    return config.with_overrides(
        seed=args.seed, out_dir=args.out, raw_mode=True if args.raw_mode else None
    )


def run_stage(command: str, config: PipelineConfig) -> None:
    if command == "all":
        run_pipeline(config)
        return
    config.out_dir.mkdir(parents=True, exist_ok=True)
    if command == "ingest":
        stage_ingest(config)
    elif command == "clean":
        series = load_series_dir(config.out_dir / "canonical")
        stage_clean(series, config)
    elif command == "impute":
        series = load_series_dir(config.out_dir / "cleaned")
        stage_impute(series, config)
    elif command == "label":
        series = load_series_dir(config.out_dir / "imputed")
        stage_label(series, config)
    elif command == "windows":
        series = load_series_dir(config.out_dir / "imputed")
        stage_windows(series, compute_labels(series, config), config)
    elif command == "analyze":
        cleaned = load_series_dir(config.out_dir / "cleaned")
        imputed = load_series_dir(config.out_dir / "imputed")
        stage_analyze(cleaned, imputed, compute_labels(imputed, config), config)
    else:  # pragma: no cover - argparse restricts choices
        raise ValueError(f"unknown command {command}")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    if args.command == "make-fixture":
        from .synth import generate_fixture_csv

        raw = args.out / "raw"
        csv_path = generate_fixture_csv(
            raw / "synthcohort.csv", n_subjects=args.subjects, days=args.days, seed=args.seed
        )
        config_path = args.out / "pipeline.ini"
        write_default_config(config_path, input_path=str(csv_path.resolve()))
        print(f"fixture written: {csv_path}")
        print(f"config written:  {config_path}")
        return 0

    try:
        config = _load(args)
        run_stage(args.command, config)
    except (ConfigError, StageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
