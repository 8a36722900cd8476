"""End-to-end batch pipeline and per-stage entry points.

Stage order is fixed: ingest -> clean -> impute -> label -> windows ->
analyze. Each stage writes its artifacts under the output directory and
every file goes through a ``.partial`` rename, so interrupted runs leave
no plausible-looking final outputs. Per-subject work can fan out across
processes (``CGMPREP_WORKERS``); results are merged in (dataset, subject)
order, which keeps every output byte independent of worker count.
"""

from __future__ import annotations

import csv
import functools
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, TypeVar

import numpy as np

from . import analysis, impute, label, quality, windows
from .config import PipelineConfig
from .ingest import DatasetInventory, inventory, parse_csv_path
from .series import (
    GLUCOSE,
    HEART_RATE,
    SubjectSeries,
    format_timestamp,
    read_canonical_csv,
    write_canonical_csv,
)
from .windowfile import write_window_file

logger = logging.getLogger(__name__)

WORKERS_ENV = "CGMPREP_WORKERS"

T = TypeVar("T")
R = TypeVar("R")


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage


def resolve_workers(config: PipelineConfig) -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", WORKERS_ENV, env)
    return config.workers


def map_subjects(fn: Callable[[T], R], items: list[T], workers: int) -> list[R]:
    """Apply a pure per-subject function, optionally across processes."""
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".partial")
    tmp.write_text(text)
    os.replace(tmp, path)


def _write_csv(path: Path, header: list[str], rows: Iterable[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    _atomic_write_text(path, buf.getvalue())


def _fmt(v: float | None) -> str:
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    return f"{v:.10g}"


# ---------------------------------------------------------------------------
# ingest


def _input_files(config: PipelineConfig) -> list[tuple[Path, str]]:
    p = config.input_path
    if p.is_dir():
        files = sorted(p.glob("*.csv"))
        if not files:
            raise StageError("ingest", f"no CSV files under {p}")
        return [(f, config.dataset_tag or f.stem) for f in files]
    if not p.exists():
        raise StageError("ingest", f"input not found: {p}")
    return [(p, config.dataset_tag or p.stem)]


def stage_ingest(config: PipelineConfig) -> list[SubjectSeries]:
    logger.info("stage ingest: reading %s", config.input_path)
    all_series: list[SubjectSeries] = []
    diagnostics: list[str] = []
    for path, tag in _input_files(config):
        series, report = parse_csv_path(path, config.schema, tag)
        all_series.extend(series)
        diagnostics.extend(f"{path.name}: {d}" for d in report.diagnostics)
        if report.duplicate_conflicts:
            diagnostics.append(
                f"{path.name}: {report.duplicate_conflicts} duplicate (subject, timestamp) rows dropped"
            )
    all_series.sort(key=lambda s: s.key)
    if not all_series:
        raise StageError("ingest", "no subjects parsed")

    write_series_dir(config.out_dir / "canonical", all_series)
    write_inventory_csv(config.out_dir / "inventory.csv", inventory(all_series))
    text = "\n".join(diagnostics) + "\n" if diagnostics else ""
    _atomic_write_text(config.out_dir / "ingest_diagnostics.txt", text)
    logger.info("stage ingest: %d subjects, %d diagnostics", len(all_series), len(diagnostics))
    return all_series


def write_series_dir(root: Path, series: list[SubjectSeries]) -> None:
    for s in series:
        d = root / s.dataset_tag
        d.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        write_canonical_csv(s, buf)
        _atomic_write_text(d / f"{s.subject_id}.csv", buf.getvalue())


def load_series_dir(root: Path) -> list[SubjectSeries]:
    if not root.is_dir():
        raise StageError("load", f"missing stage directory {root}; run the earlier stages first")
    out: list[SubjectSeries] = []
    for tag_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        for f in sorted(tag_dir.glob("*.csv")):
            out.append(read_canonical_csv(f, tag_dir.name))
    if not out:
        raise StageError("load", f"no series under {root}")
    return out


def write_inventory_csv(path: Path, inv: DatasetInventory) -> None:
    _write_csv(
        path,
        ["dataset_tag", "subject_id", "samples", "glucose_missing", "heart_rate_missing", "span_start", "span_end"],
        [
            [
                r.dataset_tag,
                r.subject_id,
                r.samples,
                r.glucose_missing,
                "" if r.heart_rate_missing is None else r.heart_rate_missing,
                format_timestamp(r.span_start),
                format_timestamp(r.span_end),
            ]
            for r in inv.rows
        ],
    )


# ---------------------------------------------------------------------------
# clean


def _clean_one(series: SubjectSeries, bounds: quality.PhysiologicalBounds):
    try:
        return quality.apply_quality(series, bounds)
    except Exception as exc:
        raise StageError("clean", f"{series.dataset_tag}/{series.subject_id}: {exc}") from exc


def stage_clean(
    series: list[SubjectSeries], config: PipelineConfig
) -> tuple[list[SubjectSeries], list[quality.ChannelQuality]]:
    logger.info("stage clean: masking zeros, bounds, and IQR fences")
    workers = resolve_workers(config)
    results = map_subjects(functools.partial(_clean_one, bounds=config.bounds), series, workers)
    cleaned = [r[0] for r in results]
    rows = [row for r in results for row in r[1]]
    write_series_dir(config.out_dir / "cleaned", cleaned)
    _write_csv(
        config.out_dir / "quality.csv",
        ["dataset_tag", "subject_id", "channel", "zeros_masked", "bounds_masked", "iqr_masked", "q1", "q3", "lower_fence", "upper_fence"],
        [
            [r.dataset_tag, r.subject_id, r.channel, r.zeros_masked, r.bounds_masked, r.iqr_masked, _fmt(r.q1), _fmt(r.q3), _fmt(r.lower_fence), _fmt(r.upper_fence)]
            for r in rows
        ],
    )
    masked = sum(r.zeros_masked + r.bounds_masked + r.iqr_masked for r in rows)
    logger.info("stage clean: %d values masked", masked)
    return cleaned, rows


# ---------------------------------------------------------------------------
# impute


def _impute_one(series: SubjectSeries, policy: impute.ImputePolicy):
    try:
        return impute.impute_all(series, policy)
    except Exception as exc:
        raise StageError("impute", f"{series.dataset_tag}/{series.subject_id}: {exc}") from exc


def stage_impute(
    series: list[SubjectSeries], config: PipelineConfig
) -> tuple[list[SubjectSeries], list[impute.ChannelImputation]]:
    logger.info("stage impute: filling short and medium bounded gaps")
    policy = impute.ImputePolicy(mode=config.impute_mode)
    workers = resolve_workers(config)
    results = map_subjects(functools.partial(_impute_one, policy=policy), series, workers)
    imputed = [r[0] for r in results]
    rows = [row for r in results for row in r[1]]
    write_series_dir(config.out_dir / "imputed", imputed)
    _write_csv(
        config.out_dir / "imputation.csv",
        ["dataset_tag", "subject_id", "channel", "category", "gaps_total", "gaps_filled", "gaps_skipped", "slots_filled"],
        [
            [r.dataset_tag, r.subject_id, r.channel, r.category, r.gaps_total, r.gaps_filled, r.gaps_skipped, r.slots_filled]
            for r in rows
        ],
    )

    trace_rows: list[impute.GapTraceRow] = []
    for s in series[: config.trace_subjects]:
        for channel in s.channels:
            trace_rows.extend(impute.gap_trace(s, channel))
    _write_csv(
        config.out_dir / "impute_trace.csv",
        ["subject_id", "channel", "index", "raw", "linear", "stineman"],
        [[r.subject_id, r.channel, r.index, _fmt(r.raw), _fmt(r.linear), _fmt(r.stineman)] for r in trace_rows],
    )
    filled = sum(r.slots_filled for r in rows)
    logger.info("stage impute: %d slots filled", filled)
    return imputed, rows


# ---------------------------------------------------------------------------
# label


def compute_labels(series: list[SubjectSeries], config: PipelineConfig) -> dict[tuple[str, str], np.ndarray]:
    return {s.key: label.label_array(s.glucose, config.hypo_threshold) for s in series}


def stage_label(
    series: list[SubjectSeries], config: PipelineConfig
) -> dict[tuple[str, str], np.ndarray]:
    logger.info("stage label: assigning onset-proximity classes")
    labels = compute_labels(series, config)
    root = config.out_dir / "labeled"
    for s in series:
        d = root / s.dataset_tag
        d.mkdir(parents=True, exist_ok=True)
        lab = labels[s.key]
        hr = s.heart_rate
        rows = []
        for k in range(len(s)):
            rows.append(
                [
                    s.subject_id,
                    format_timestamp(s.timestamp(k)),
                    "" if np.isnan(s.glucose[k]) else repr(float(s.glucose[k])),
                    "" if hr is None or np.isnan(hr[k]) else repr(float(hr[k])),
                    "" if lab[k] == label.NO_LABEL else int(lab[k]),
                ]
            )
        _write_csv(d / f"{s.subject_id}.csv", ["subject_id", "timestamp", "glucose", "heart_rate", "class"], rows)
    counts = np.zeros(6, dtype=int)
    for lab in labels.values():
        for c in range(6):
            counts[c] += int((lab == c).sum())
    logger.info("stage label: class counts %s", counts.tolist())
    return labels


# ---------------------------------------------------------------------------
# windows


def _windows_one(
    item: tuple[SubjectSeries, np.ndarray],
    params: windows.NormalizationParams,
    length: int,
    stride: int,
    include_hr: bool,
) -> list[windows.Window]:
    series, labels = item
    try:
        normalized = windows.apply_normalization(series, params)
        normalized = windows.fill_hr_zero(normalized)
        return windows.generate_windows(normalized, labels, length, stride, include_hr)
    except Exception as exc:
        raise StageError("windows", f"{series.dataset_tag}/{series.subject_id}: {exc}") from exc


def stage_windows(
    series: list[SubjectSeries],
    labels: dict[tuple[str, str], np.ndarray],
    config: PipelineConfig,
) -> windows.SplitManifest:
    logger.info("stage windows: normalize, window, split, balance (seed=%d)", config.seed)
    include_hr = config.include_heart_rate
    if include_hr:
        lacking = [s.subject_id for s in series if s.heart_rate is None]
        if lacking:
            raise StageError("windows", f"heart-rate channel missing for subjects: {lacking}")
    channels = (GLUCOSE, HEART_RATE) if include_hr else (GLUCOSE,)
    try:
        params = windows.fit_normalization(series, channels, config.normalization_scope)
    except windows.WindowingError as exc:
        raise StageError("windows", str(exc)) from exc
    _write_csv(
        config.out_dir / "normalization.csv",
        ["channel", "min", "max", "scope"],
        [
            [GLUCOSE, _fmt(params.glucose_min), _fmt(params.glucose_max), params.scope],
            *(
                [["heart_rate", _fmt(params.heart_rate_min), _fmt(params.heart_rate_max), params.scope]]
                if include_hr
                else []
            ),
        ],
    )

    workers = resolve_workers(config)
    per_subject = map_subjects(
        functools.partial(
            _windows_one,
            params=params,
            length=config.window_length,
            stride=config.stride,
            include_hr=include_hr,
        ),
        [(s, labels[s.key]) for s in series],
        workers,
    )
    all_windows = [w for ws in per_subject for w in ws]
    kept = [w for w in all_windows if w.label in config.label_set]
    logger.info(
        "stage windows: %d windows, %d in label set %s", len(all_windows), len(kept), config.label_set
    )

    splits, subject_rows = windows.chronological_split(kept, config.test_ratio, config.val_ratio)
    manifest = windows.SplitManifest(seed=config.seed, subjects=subject_rows)
    for idx, name in enumerate(windows.SPLIT_NAMES):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=config.seed, spawn_key=(idx,)))
        )
        try:
            balanced, selections = windows.undersample(splits[name], config.label_set, rng)
        except windows.WindowingError as exc:
            raise StageError("windows", f"{name}: {exc}") from exc
        manifest.selections[name] = selections
        values = np.stack([w.values for w in balanced]).astype(np.float32)
        labels_arr = np.array([w.label for w in balanced], dtype=np.uint8)
        write_window_file(
            config.out_dir / f"{name}.dw", values, labels_arr, label_set=len(config.label_set)
        )
        logger.info("stage windows: %s -> %d windows per class, %d total", name, len(balanced) // len(config.label_set), len(balanced))
    _atomic_write_text(config.out_dir / "split_manifest.txt", manifest.to_text())
    return manifest


# ---------------------------------------------------------------------------
# analyze


def stage_analyze(
    cleaned: list[SubjectSeries],
    imputed: list[SubjectSeries],
    labels: dict[tuple[str, str], np.ndarray],
    config: PipelineConfig,
) -> None:
    logger.info("stage analyze: missingness and correlation reports")
    miss_rows = analysis.missingness_report(cleaned, imputed)
    _write_csv(
        config.out_dir / "missingness.csv",
        ["dataset_tag", "bucket", "gaps_before", "gaps_after"],
        [[r.dataset_tag, r.bucket, r.gaps_before, r.gaps_after] for r in miss_rows],
    )
    lines = [f"{'dataset':<20} {'bucket':<8} {'before':>8} {'after':>8}"]
    for r in miss_rows:
        lines.append(f"{r.dataset_tag:<20} {r.bucket:<8} {r.gaps_before:>8} {r.gaps_after:>8}")
    _atomic_write_text(config.out_dir / "missingness.txt", "\n".join(lines) + "\n")

    if config.include_heart_rate:
        pairs = [(s, labels[s.key]) for s in imputed]
        report = analysis.per_class_correlation(pairs)
        rows = [["overall", _fmt(report.overall.rho), report.overall.n]]
        rows += [[str(e.label), _fmt(e.rho), e.n] for e in report.per_class]
        _write_csv(config.out_dir / "correlation.csv", ["class", "rho", "n"], rows)
        lines = [f"{'class':<8} {'rho':>8} {'n':>10}"]
        entries = [report.overall] + report.per_class
        for name, entry in zip((r[0] for r in rows), entries):
            rho = "n/a" if np.isnan(entry.rho) else f"{entry.rho:+.3f}"
            lines.append(f"{name:<8} {rho:>8} {entry.n:>10}")
        _atomic_write_text(config.out_dir / "correlation.txt", "\n".join(lines) + "\n")
    else:
        logger.info("stage analyze: glucose-only run, correlation skipped")

    from . import report as report_mod  # deferred: pulls in matplotlib

    report_mod.render_all(config)


# ---------------------------------------------------------------------------
# orchestration


def run_pipeline(config: PipelineConfig) -> windows.SplitManifest:
    """Run every stage in order; raw mode bypasses cleaning and imputation."""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    series = stage_ingest(config)
    if config.raw_mode:
        logger.info("raw mode: quality and imputation stages disabled")
        cleaned = [s.copy() for s in series]
        imputed = [s.copy() for s in series]
        write_series_dir(config.out_dir / "cleaned", cleaned)
        write_series_dir(config.out_dir / "imputed", imputed)
    else:
        cleaned, _ = stage_clean(series, config)
        imputed, _ = stage_impute(cleaned, config)
    labels = stage_label(imputed, config)
    manifest = stage_windows(imputed, labels, config)
    stage_analyze(cleaned, imputed, labels, config)
    logger.info("pipeline complete: artifacts under %s", config.out_dir)
    return manifest
