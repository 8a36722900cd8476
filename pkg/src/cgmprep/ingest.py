"""Raw CSV parsing and alignment onto the canonical 5-minute grid."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import IO

import numpy as np

from .series import GRID_STEP_SECONDS, SubjectSeries

logger = logging.getLogger(__name__)

# Half a grid step: raw points farther than this from every slot are dropped.
ALIGN_TOLERANCE_SECONDS = GRID_STEP_SECONDS / 2


class IngestError(ValueError):
    """Raised for unrecoverable ingest problems (empty input, bad schema)."""


@dataclass(frozen=True)
class ColumnSchema:
    """Names of the raw CSV columns of interest."""

    timestamp: str = "timestamp"
    subject_id: str = "subject_id"
    glucose: str = "glucose"
    heart_rate: str | None = None


@dataclass
class ParseReport:
    """Row-level bookkeeping for one parsed stream."""

    rows_read: int = 0
    rows_skipped: int = 0
    duplicate_conflicts: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def skip(self, line: int, reason: str) -> None:
        self.rows_skipped += 1
        self.diagnostics.append(f"line {line}: {reason}")


@dataclass(frozen=True)
class InventoryRow:
    dataset_tag: str
    subject_id: str
    samples: int
    glucose_missing: int
    heart_rate_missing: int | None
    span_start: datetime
    span_end: datetime


@dataclass
class DatasetInventory:
    rows: list[InventoryRow] = field(default_factory=list)

    def by_dataset(self) -> dict[str, list[InventoryRow]]:
        grouped: dict[str, list[InventoryRow]] = {}
        for row in self.rows:
            grouped.setdefault(row.dataset_tag, []).append(row)
        return grouped


def parse_timestamp(cell: str) -> datetime:
    """Parse ISO-8601 or integer epoch seconds; naive stamps are taken as UTC."""
    cell = cell.strip()
    if not cell:
        raise ValueError("empty timestamp")
    try:
        ts = datetime.fromtimestamp(int(cell), tz=timezone.utc)
    except (ValueError, OverflowError, OSError):
        ts = datetime.fromisoformat(cell)
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        else:
            ts = ts.astimezone(timezone.utc)
    return ts


def _parse_value(cell: str | None) -> float:
    """Empty / NaN / absent cells become missing; garbage raises ValueError."""
    if cell is None:
        return np.nan
    cell = cell.strip()
    if not cell or cell.lower() == "nan":
        return np.nan
    return float(cell)


def parse_csv(
    stream: IO[str],
    schema: ColumnSchema,
    dataset_tag: str,
) -> tuple[list[SubjectSeries], ParseReport]:
    """Parse raw rows into one aligned SubjectSeries per subject.

    Malformed rows (bad timestamp, non-numeric value cell, missing subject)
    are skipped with a line-numbered diagnostic. Duplicate
    (subject, timestamp) rows keep the first occurrence and count a conflict.
    """
    reader = csv.DictReader(stream)
    if reader.fieldnames is None:
        raise IngestError("missing header row")
    required = [schema.timestamp, schema.subject_id, schema.glucose]
    if schema.heart_rate:
        required.append(schema.heart_rate)
    absent = [c for c in required if c not in reader.fieldnames]
    if absent:
        raise IngestError(f"schema columns not in header: {absent}")

    report = ParseReport()
    # subject -> timestamp -> (glucose, heart_rate)
    by_subject: dict[str, dict[datetime, tuple[float, float]]] = {}
    for row in reader:
        report.rows_read += 1
        line = reader.line_num
        subject = (row.get(schema.subject_id) or "").strip()
        if not subject:
            report.skip(line, "missing subject id")
            continue
        try:
            ts = parse_timestamp(row.get(schema.timestamp) or "")
        except ValueError as exc:
            report.skip(line, f"unparseable timestamp: {exc}")
            continue
        try:
            glucose = _parse_value(row.get(schema.glucose))
            hr = _parse_value(row.get(schema.heart_rate)) if schema.heart_rate else np.nan
        except ValueError as exc:
            report.skip(line, f"non-numeric value: {exc}")
            continue
        points = by_subject.setdefault(subject, {})
        if ts in points:
            report.duplicate_conflicts += 1
            continue
        points[ts] = (glucose, hr)

    series: list[SubjectSeries] = []
    for subject in sorted(by_subject):
        points = by_subject[subject]
        glucose_points = [(ts, g) for ts, (g, _) in sorted(points.items()) if not np.isnan(g)]
        hr_points = [(ts, h) for ts, (_, h) in sorted(points.items()) if not np.isnan(h)]
        if not glucose_points and not hr_points:
            logger.warning("%s/%s: no usable values, subject dropped", dataset_tag, subject)
            continue
        series.append(
            align_to_grid(
                glucose_points,
                hr_points if schema.heart_rate else None,
                subject_id=subject,
                dataset_tag=dataset_tag,
            )
        )
    return series, report


def _floor_to_grid(ts: datetime) -> datetime:
    floored = math.floor(ts.timestamp() / GRID_STEP_SECONDS) * GRID_STEP_SECONDS
    return datetime.fromtimestamp(floored, tz=timezone.utc)


def _nearest_slot(offset_seconds: float) -> int:
    # Round to the nearest slot; an exact half-step offset goes to the
    # earlier slot so a reading is never claimed by two slots.
    k, r = divmod(offset_seconds, GRID_STEP_SECONDS)
    return int(k) if r <= ALIGN_TOLERANCE_SECONDS else int(k) + 1


def _fill_slots(
    points: list[tuple[datetime, float]],
    grid_start: datetime,
    n_slots: int,
) -> np.ndarray:
    """Nearest-within-tolerance undersampling: one raw point per slot, at most.

    Ties between two points equidistant from a slot go to the earlier point.
    Points denser than the grid are dropped, never averaged.
    """
    values = np.full(n_slots, np.nan)
    best_dist = np.full(n_slots, np.inf)
    for ts, value in points:
        offset = (ts - grid_start).total_seconds()
        slot = _nearest_slot(offset)
        if not 0 <= slot < n_slots:
            continue
        dist = abs(offset - slot * GRID_STEP_SECONDS)
        # strict < keeps the earlier point on equal distance (points are sorted)
        if dist < best_dist[slot]:
            best_dist[slot] = dist
            values[slot] = value
    return values


def align_to_grid(
    glucose_points: list[tuple[datetime, float]],
    heart_rate_points: list[tuple[datetime, float]] | None,
    subject_id: str,
    dataset_tag: str,
) -> SubjectSeries:
    """Snap raw (timestamp, value) points onto the shared 5-minute grid.

    The grid starts at the first raw timestamp floored to a 5-minute
    boundary and extends to the nearest slot of the last raw point. Slots
    with no point within half a step stay missing.
    """
    all_ts = [ts for ts, _ in glucose_points]
    if heart_rate_points:
        all_ts += [ts for ts, _ in heart_rate_points]
    if not all_ts:
        raise IngestError(f"{dataset_tag}/{subject_id}: empty series")

    grid_start = _floor_to_grid(min(all_ts))
    last_offset = (max(all_ts) - grid_start).total_seconds()
    n_slots = _nearest_slot(last_offset) + 1

    glucose = _fill_slots(glucose_points, grid_start, n_slots)
    heart_rate = None
    if heart_rate_points is not None:
        heart_rate = _fill_slots(heart_rate_points, grid_start, n_slots)
    return SubjectSeries(
        subject_id=subject_id,
        dataset_tag=dataset_tag,
        grid_start=grid_start,
        glucose=glucose,
        heart_rate=heart_rate,
    )


def inventory(series: list[SubjectSeries]) -> DatasetInventory:
    """Per-subject sample/missing counts and time span, grouped by dataset."""
    rows = []
    for s in sorted(series, key=lambda s: s.key):
        rows.append(
            InventoryRow(
                dataset_tag=s.dataset_tag,
                subject_id=s.subject_id,
                samples=len(s),
                glucose_missing=s.missing_count("glucose"),
                heart_rate_missing=(
                    None if s.heart_rate is None else s.missing_count("heart_rate")
                ),
                span_start=s.grid_start,
                span_end=s.timestamp(len(s) - 1) if len(s) else s.grid_start,
            )
        )
    return DatasetInventory(rows=rows)


def parse_csv_path(
    path: Path, schema: ColumnSchema, dataset_tag: str | None = None
) -> tuple[list[SubjectSeries], ParseReport]:
    tag = dataset_tag if dataset_tag is not None else path.stem
    with path.open("r", newline="") as fh:
        return parse_csv(fh, schema, tag)
