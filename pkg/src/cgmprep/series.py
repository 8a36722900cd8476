"""Canonical uniform-grid series model shared by every pipeline stage.

A subject's sensor history lives on a fixed 5-minute grid. Missing samples
are NaN in the value arrays, which keeps 0.0 observable as a real (if
erroneous) sensor reading until the quality stage masks it.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import IO, Iterator

import numpy as np

GRID_STEP = timedelta(minutes=5)
GRID_STEP_MINUTES = 5
GRID_STEP_SECONDS = 300

GLUCOSE = "glucose"
HEART_RATE = "heart_rate"

CANONICAL_COLUMNS = ("timestamp", "subject_id", "glucose", "heart_rate")


class SeriesError(ValueError):
    """Raised when a series violates the uniform-grid contract."""


def _as_channel(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise SeriesError(f"channel must be 1-D, got shape {arr.shape}")
    return arr


@dataclass
class SubjectSeries:
    """One subject's glucose (and optional heart-rate) values on the 5-min grid.

    ``glucose[k]`` belongs to timestamp ``grid_start + k * 5min``. NaN marks
    a missing sample. ``heart_rate``, when present, shares the grid and length.
    """

    subject_id: str
    dataset_tag: str
    grid_start: datetime
    glucose: np.ndarray = field(repr=False)
    heart_rate: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.glucose = _as_channel(self.glucose)
        if self.heart_rate is not None:
            self.heart_rate = _as_channel(self.heart_rate)
            if len(self.heart_rate) != len(self.glucose):
                raise SeriesError(
                    f"{self.subject_id}: heart_rate length {len(self.heart_rate)}"
                    f" != glucose length {len(self.glucose)}"
                )
        if self.grid_start.tzinfo is None:
            self.grid_start = self.grid_start.replace(tzinfo=timezone.utc)
        else:
            self.grid_start = self.grid_start.astimezone(timezone.utc)
        if self.grid_start.second or self.grid_start.microsecond:
            raise SeriesError(f"{self.subject_id}: grid_start must have minute precision")
        if (self.grid_start.minute % GRID_STEP_MINUTES) != 0:
            raise SeriesError(f"{self.subject_id}: grid_start not on a 5-minute boundary")

    def __len__(self) -> int:
        return len(self.glucose)

    @property
    def key(self) -> tuple[str, str]:
        return (self.dataset_tag, self.subject_id)

    @property
    def channels(self) -> tuple[str, ...]:
        if self.heart_rate is None:
            return (GLUCOSE,)
        return (GLUCOSE, HEART_RATE)

    def channel(self, name: str) -> np.ndarray:
        if name == GLUCOSE:
            return self.glucose
        if name == HEART_RATE:
            if self.heart_rate is None:
                raise SeriesError(f"{self.subject_id}: no heart_rate channel")
            return self.heart_rate
        raise SeriesError(f"unknown channel {name!r}")

    def timestamp(self, index: int) -> datetime:
        return self.grid_start + index * GRID_STEP

    def timestamps(self) -> Iterator[datetime]:
        for k in range(len(self)):
            yield self.grid_start + k * GRID_STEP

    def missing_count(self, name: str) -> int:
        return int(np.isnan(self.channel(name)).sum())

    def copy(self) -> "SubjectSeries":
        hr = None if self.heart_rate is None else self.heart_rate.copy()
        return replace(self, glucose=self.glucose.copy(), heart_rate=hr)

    def with_channel(self, name: str, values: np.ndarray) -> "SubjectSeries":
        """Copy of this series with one channel replaced (same grid)."""
        values = _as_channel(values)
        if len(values) != len(self):
            raise SeriesError("replacement channel length mismatch")
        if name == GLUCOSE:
            return replace(self, glucose=values, heart_rate=None if self.heart_rate is None else self.heart_rate.copy())
        if name == HEART_RATE:
            return replace(self, glucose=self.glucose.copy(), heart_rate=values)
        raise SeriesError(f"unknown channel {name!r}")


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S")


def _format_value(v: float) -> str:
    if np.isnan(v):
        return ""
    return repr(float(v))


def write_canonical_csv(series: SubjectSeries, out: IO[str] | Path) -> None:
    """Write ``timestamp,subject_id,glucose,heart_rate`` rows, one per grid slot.

    Missing values are empty fields. When the series has no heart-rate
    channel the column is emitted empty throughout; a heart-rate channel
    with zero observed values is therefore indistinguishable from an
    absent one after a round trip.
    """
    if isinstance(out, Path):
        with out.open("w", newline="") as fh:
            write_canonical_csv(series, fh)
        return
    writer = csv.writer(out)
    writer.writerow(CANONICAL_COLUMNS)
    hr = series.heart_rate
    for k in range(len(series)):
        writer.writerow(
            [
                format_timestamp(series.timestamp(k)),
                series.subject_id,
                _format_value(series.glucose[k]),
                "" if hr is None else _format_value(hr[k]),
            ]
        )


def read_canonical_csv(source: IO[str] | Path, dataset_tag: str) -> SubjectSeries:
    """Strict reader for canonical per-subject CSVs.

    Timestamps must already sit on a contiguous 5-minute grid; this is the
    fast path between pipeline stages and preserves leading/trailing missing
    slots exactly (unlike raw ingestion, which anchors the grid on observed
    points).
    """
    if isinstance(source, Path):
        with source.open("r", newline="") as fh:
            return read_canonical_csv(fh, dataset_tag)
    reader = csv.DictReader(source)
    subject_id: str | None = None
    grid_start: datetime | None = None
    glucose: list[float] = []
    heart_rate: list[float] = []
    any_hr_cell = False
    expected: datetime | None = None
    for row in reader:
        ts = datetime.fromisoformat(row["timestamp"])
        if ts.tzinfo is None:
            ts = ts.replace(tzinfo=timezone.utc)
        if subject_id is None:
            subject_id = row["subject_id"]
            grid_start = ts
            expected = ts
        if ts != expected:
            raise SeriesError(f"{subject_id}: canonical grid broken at {row['timestamp']}")
        expected = ts + GRID_STEP
        g = row.get("glucose", "")
        h = row.get("heart_rate", "")
        glucose.append(float(g) if g else np.nan)
        heart_rate.append(float(h) if h else np.nan)
        if h:
            any_hr_cell = True
    if subject_id is None or grid_start is None:
        raise SeriesError("empty canonical file")
    return SubjectSeries(
        subject_id=subject_id,
        dataset_tag=dataset_tag,
        grid_start=grid_start,
        glucose=np.array(glucose),
        heart_rate=np.array(heart_rate) if any_hr_cell else None,
    )
