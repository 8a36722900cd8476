"""Deterministic synthetic CGM/heart-rate fixture for demos and end-to-end tests.

Generates a small cohort with realistic texture: daily glucose rhythms with
meal excursions, scripted hypoglycemic dips, sensor-style artifacts (zeros,
implausible spikes/drops), and missing runs in all three duration bands.
Everything derives from one seed, so the emitted CSV is byte-stable.
"""

from __future__ import annotations

import csv
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .series import GRID_STEP

SAMPLES_PER_DAY = 288


def _subject_arrays(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    t = np.arange(n)
    day_phase = 2 * np.pi * t / SAMPLES_PER_DAY
    glucose = (
        145.0
        + 35.0 * np.sin(day_phase + rng.uniform(0, 2 * np.pi))
        + 18.0 * np.sin(3.1 * day_phase + rng.uniform(0, 2 * np.pi))
    )
    # slow AR(1) drift so the trace is not a pure sinusoid
    drift = np.empty(n)
    drift[0] = 0.0
    eps = rng.normal(0, 2.2, size=n)
    for i in range(1, n):
        drift[i] = 0.97 * drift[i - 1] + eps[i]
    glucose = glucose + drift

    heart = 72.0 + 9.0 * np.sin(day_phase + rng.uniform(0, 2 * np.pi)) + rng.normal(0, 2.5, n)

    # scripted hypoglycemic episodes, roughly every 8-14 hours, 3-5 samples wide;
    # heart rate drifts up in the hour before each dip so the per-class
    # correlation has visible structure
    pos = int(rng.integers(60, 140))
    while pos < n - 30:
        width = int(rng.integers(3, 6))
        depth = rng.uniform(55.0, 67.0)
        glucose[pos : pos + width] = depth + rng.normal(0, 1.5, width)
        lead = np.arange(max(pos - 12, 0), pos)
        heart[lead] += np.linspace(2.0, 9.0, lead.size)
        pos += int(rng.integers(96, 170))
    return glucose, heart


def _inject_artifacts(
    rng: np.random.Generator, glucose: np.ndarray, heart: np.ndarray
) -> None:
    n = glucose.size
    for _ in range(int(rng.integers(4, 8))):
        glucose[int(rng.integers(0, n))] = 0.0
    for _ in range(int(rng.integers(4, 8))):
        heart[int(rng.integers(0, n))] = 0.0
    for _ in range(int(rng.integers(3, 6))):
        glucose[int(rng.integers(0, n))] = rng.uniform(520.0, 640.0)
    for _ in range(int(rng.integers(2, 5))):
        glucose[int(rng.integers(0, n))] = rng.uniform(15.0, 38.0)
    for _ in range(int(rng.integers(2, 4))):
        heart[int(rng.integers(0, n))] = rng.uniform(205.0, 250.0)
    for _ in range(int(rng.integers(2, 4))):
        heart[int(rng.integers(0, n))] = rng.uniform(5.0, 28.0)


def _inject_gaps(rng: np.random.Generator, values: np.ndarray) -> None:
    n = values.size
    # short gaps
    for _ in range(int(rng.integers(10, 16))):
        start = int(rng.integers(5, n - 10))
        values[start : start + int(rng.integers(1, 6))] = np.nan
    # medium gaps
    for _ in range(int(rng.integers(3, 6))):
        start = int(rng.integers(30, n - 40))
        values[start : start + int(rng.integers(6, 24))] = np.nan
    # one long overnight-style dropout
    start = int(rng.integers(n // 2, n - 80))
    values[start : start + int(rng.integers(24, 60))] = np.nan


def generate_fixture_csv(
    out_csv: Path,
    n_subjects: int = 5,
    days: int = 7,
    seed: int = 20240801,
    heart_rate: bool = True,
) -> Path:
    """Write one raw CSV covering the whole synthetic cohort."""
    rng = np.random.Generator(np.random.PCG64(seed))
    n = days * SAMPLES_PER_DAY
    start = datetime(2024, 3, 4, 0, 0, tzinfo=timezone.utc)
    out_csv.parent.mkdir(parents=True, exist_ok=True)
    with out_csv.open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["timestamp", "subject_id", "glucose"]
        if heart_rate:
            header.append("heart_rate")
        writer.writerow(header)
        for s in range(n_subjects):
            subject = f"subj{s + 1:02d}"
            glucose, heart = _subject_arrays(rng, n)
            _inject_artifacts(rng, glucose, heart)
            _inject_gaps(rng, glucose)
            _inject_gaps(rng, heart)
            for k in range(n):
                g, h = glucose[k], heart[k]
                if np.isnan(g) and np.isnan(h):
                    continue  # a fully dropped sample emits no row at all
                ts = (start + k * GRID_STEP).strftime("%Y-%m-%dT%H:%M:%S")
                row = [ts, subject, "" if np.isnan(g) else f"{g:.1f}"]
                if heart_rate:
                    row.append("" if np.isnan(h) else f"{h:.1f}")
                writer.writerow(row)
    return out_csv
