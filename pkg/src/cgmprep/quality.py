"""Outlier masking: sentinel zeros, hard physiological bounds, per-subject IQR fences.

Order is fixed: zeros are masked first, fences are computed once on the
zero-masked values, then hard bounds and fences are applied together.
Masked values become missing (NaN); nothing is ever smoothed or replaced
with an estimate at this stage.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .series import GLUCOSE, HEART_RATE, SubjectSeries

logger = logging.getLogger(__name__)

IQR_MIN_SAMPLES = 4
FENCE_MULTIPLIER = 1.5


class InsufficientDataError(ValueError):
    """Too few observed values to estimate quartiles."""


@dataclass(frozen=True)
class PhysiologicalBounds:
    """Hard plausibility limits per channel; survival is boundary-inclusive."""

    glucose_min: float = 40.0
    glucose_max: float = 500.0
    heart_rate_min: float = 30.0
    heart_rate_max: float = 200.0

    def __post_init__(self) -> None:
        if not (self.glucose_min < self.glucose_max):
            raise ValueError("glucose bounds: min must be < max")
        if not (self.heart_rate_min < self.heart_rate_max):
            raise ValueError("heart rate bounds: min must be < max")

    def limits(self, channel: str) -> tuple[float, float]:
        if channel == GLUCOSE:
            return self.glucose_min, self.glucose_max
        if channel == HEART_RATE:
            return self.heart_rate_min, self.heart_rate_max
        raise ValueError(f"unknown channel {channel!r}")


@dataclass
class ChannelQuality:
    """Masking outcome for one subject/channel pair."""

    dataset_tag: str
    subject_id: str
    channel: str
    zeros_masked: int = 0
    bounds_masked: int = 0
    iqr_masked: int = 0
    q1: float | None = None
    q3: float | None = None
    lower_fence: float | None = None
    upper_fence: float | None = None


def _percentile(sorted_values: np.ndarray, p: float) -> float:
    """Linear interpolation of order statistics at position h = (n-1)*p."""
    n = sorted_values.size
    h = (n - 1) * p
    lo = math.floor(h)
    frac = h - lo
    if lo + 1 < n:
        return float(sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]))
    return float(sorted_values[lo])


def iqr_fences(values: np.ndarray) -> tuple[float, float, float, float]:
    """Quartiles and 1.5*IQR fences of one subject's observed channel values.

    Returns (q1, q3, lower_fence, upper_fence). Requires at least four
    observed values; callers treat the failure as "skip IQR, keep hard
    bounds" rather than fatal.
    """
    v = np.asarray(values, dtype=float)
    v = np.sort(v[~np.isnan(v)])
    if v.size < IQR_MIN_SAMPLES:
        raise InsufficientDataError(
            f"insufficient data for IQR: {v.size} values (need {IQR_MIN_SAMPLES})"
        )
    q1 = _percentile(v, 0.25)
    q3 = _percentile(v, 0.75)
    iqr = q3 - q1
    return q1, q3, q1 - FENCE_MULTIPLIER * iqr, q3 + FENCE_MULTIPLIER * iqr


def mask_zeros(series: SubjectSeries) -> tuple[SubjectSeries, dict[str, int]]:
    """Turn exact 0.0 readings into missing values in every channel.

    Sensor dropouts are commonly logged as zero; masking them before the
    quartile pass keeps them from dragging Q1 down and hiding real
    low-range anomalies.
    """
    out = series.copy()
    counts: dict[str, int] = {}
    for name in out.channels:
        values = out.channel(name)
        zero = values == 0.0
        values[zero] = np.nan
        counts[name] = int(zero.sum())
    return out, counts


def mask_outliers(
    series: SubjectSeries,
    bounds: PhysiologicalBounds,
    reports: list[ChannelQuality] | None = None,
) -> tuple[SubjectSeries, list[ChannelQuality]]:
    """Mask hard-bound violations and per-subject IQR fence violations.

    Fences are estimated from the current (zero-masked) values of this
    subject and channel. A value breaking both a hard bound and a fence is
    counted once, under bounds. Channels with fewer than four observed
    values skip the fence pass but still get hard-bound masking.

    ``reports`` may carry zero-mask counts forward; rows are matched by
    (subject, channel) and extended in place.
    """
    out = series.copy()
    rows: list[ChannelQuality] = []
    existing = {(r.subject_id, r.channel): r for r in reports or []}
    for name in out.channels:
        row = existing.get((series.subject_id, name)) or ChannelQuality(
            dataset_tag=series.dataset_tag, subject_id=series.subject_id, channel=name
        )
        values = out.channel(name)
        observed = ~np.isnan(values)
        lo_hard, hi_hard = bounds.limits(name)
        try:
            q1, q3, lo_fence, hi_fence = iqr_fences(values[observed])
            row.q1, row.q3 = q1, q3
            row.lower_fence, row.upper_fence = lo_fence, hi_fence
            fence_bad = observed & ((values < lo_fence) | (values > hi_fence))
        except InsufficientDataError as exc:
            logger.info("%s/%s %s: %s", series.dataset_tag, series.subject_id, name, exc)
            fence_bad = np.zeros(len(values), dtype=bool)
        bounds_bad = observed & ((values < lo_hard) | (values > hi_hard))
        row.bounds_masked += int(bounds_bad.sum())
        row.iqr_masked += int((fence_bad & ~bounds_bad).sum())
        values[bounds_bad | fence_bad] = np.nan
        rows.append(row)
    return out, rows


def apply_quality(
    series: SubjectSeries, bounds: PhysiologicalBounds
) -> tuple[SubjectSeries, list[ChannelQuality]]:
    """Full quality pass for one subject: zeros, then bounds + fences."""
    zeroed, zero_counts = mask_zeros(series)
    rows = [
        ChannelQuality(
            dataset_tag=series.dataset_tag,
            subject_id=series.subject_id,
            channel=name,
            zeros_masked=zero_counts[name],
        )
        for name in series.channels
    ]
    return mask_outliers(zeroed, bounds, rows)
