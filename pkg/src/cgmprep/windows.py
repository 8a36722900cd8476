"""Normalization, sliding windows, chronological splits, and class balancing.

Everything here is a pure function of (input series, parameters, seed):
window identifiers get a deterministic global sort before any seeded
selection, so results do not depend on traversal or worker order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .label import NO_LABEL
from .series import GLUCOSE, HEART_RATE, SubjectSeries

logger = logging.getLogger(__name__)

WINDOW_LENGTH = 25  # 2 hours on the 5-minute grid
TEST_RATIO = 0.15
VAL_OF_TEMP_RATIO = 0.1765

SPLIT_NAMES = ("train", "val", "test")

GLOBAL_SCOPE = "global"
TRAIN_ONLY_SCOPE = "train_only"


class WindowingError(ValueError):
    pass


@dataclass(frozen=True)
class NormalizationParams:
    """Per-channel affine map v' = (v - min) / (max - min); never clipped."""

    glucose_min: float
    glucose_max: float
    heart_rate_min: float | None = None
    heart_rate_max: float | None = None
    scope: str = GLOBAL_SCOPE

    def limits(self, channel: str) -> tuple[float, float]:
        if channel == GLUCOSE:
            return self.glucose_min, self.glucose_max
        if channel == HEART_RATE:
            if self.heart_rate_min is None or self.heart_rate_max is None:
                raise WindowingError("no heart-rate normalization fitted")
            return self.heart_rate_min, self.heart_rate_max
        raise WindowingError(f"unknown channel {channel!r}")


@dataclass(frozen=True)
class Window:
    """A gap-free stretch of normalized samples labeled by its final slot."""

    dataset_tag: str
    subject_id: str
    start_index: int
    values: np.ndarray  # (length, channels)
    label: int

    @property
    def sort_key(self) -> tuple[str, str, int]:
        return (self.dataset_tag, self.subject_id, self.start_index)


@dataclass
class SubjectSplit:
    dataset_tag: str
    subject_id: str
    n_windows: int
    n_train: int
    n_val: int
    n_test: int


@dataclass
class SplitManifest:
    """Deterministic record of split membership and undersampling picks."""

    seed: int
    subjects: list[SubjectSplit] = field(default_factory=list)
    # split name -> label -> sorted window identifiers (tag, subject, start)
    selections: dict[str, dict[int, list[tuple[str, str, int]]]] = field(default_factory=dict)

    def to_text(self) -> str:
        lines = [f"seed = {self.seed}", "", "[subjects]"]
        for s in sorted(self.subjects, key=lambda s: (s.dataset_tag, s.subject_id)):
            lines.append(
                f"{s.dataset_tag}/{s.subject_id}: windows={s.n_windows}"
                f" train={s.n_train} val={s.n_val} test={s.n_test}"
            )
        for split in SPLIT_NAMES:
            per_label = self.selections.get(split, {})
            for label in sorted(per_label):
                lines.append("")
                lines.append(f"[{split}/class{label}]")
                for tag, subject, start in per_label[label]:
                    lines.append(f"{tag}/{subject}:{start}")
        return "\n".join(lines) + "\n"


def _pool_values(
    series_list: list[SubjectSeries], channel: str, scope: str, train_fraction: float
) -> np.ndarray:
    chunks = []
    for s in series_list:
        v = s.channel(channel)
        v = v[~np.isnan(v)]
        if scope == TRAIN_ONLY_SCOPE:
            v = v[: math.floor(train_fraction * v.size)]
        chunks.append(v)
    return np.concatenate(chunks) if chunks else np.array([])


def fit_normalization(
    series_list: list[SubjectSeries],
    channels: tuple[str, ...],
    scope: str = GLOBAL_SCOPE,
    train_fraction: float = (1 - TEST_RATIO) * (1 - VAL_OF_TEMP_RATIO),
) -> NormalizationParams:
    """Pooled min-max per channel across all subjects.

    Global scope pools every observed value, which avoids biasing the map
    toward heavily represented subjects. Train-only scope pools only each
    subject's leading train fraction; later values may then map outside
    [0, 1] and are deliberately not clipped.
    """
    if scope not in (GLOBAL_SCOPE, TRAIN_ONLY_SCOPE):
        raise WindowingError(f"unknown normalization scope {scope!r}")
    limits: dict[str, tuple[float, float]] = {}
    for channel in channels:
        pool = _pool_values(series_list, channel, scope, train_fraction)
        if pool.size < 2:
            raise WindowingError(f"{channel}: not enough observed values to normalize")
        lo, hi = float(pool.min()), float(pool.max())
        if lo == hi:
            raise WindowingError(f"{channel}: degenerate channel, min == max == {lo}")
        limits[channel] = (lo, hi)
    g = limits[GLUCOSE]
    h = limits.get(HEART_RATE)
    return NormalizationParams(
        glucose_min=g[0],
        glucose_max=g[1],
        heart_rate_min=h[0] if h else None,
        heart_rate_max=h[1] if h else None,
        scope=scope,
    )


def apply_normalization(series: SubjectSeries, params: NormalizationParams) -> SubjectSeries:
    out = series.copy()
    for channel in out.channels:
        if channel == HEART_RATE and params.heart_rate_min is None:
            continue
        lo, hi = params.limits(channel)
        v = out.channel(channel)
        v -= lo
        v /= hi - lo
    return out


def fill_hr_zero(series: SubjectSeries) -> SubjectSeries:
    """Replace missing heart-rate slots with 0.0; glucose gaps stay missing."""
    out = series.copy()
    if out.heart_rate is not None:
        hr = out.heart_rate
        hr[np.isnan(hr)] = 0.0
    return out


def generate_windows(
    series: SubjectSeries,
    labels: np.ndarray,
    length: int = WINDOW_LENGTH,
    stride: int = 1,
    include_heart_rate: bool = False,
) -> list[Window]:
    """Stride windows over one subject; any missing glucose slot voids a window.

    The label is the class of the window's final slot. Subjects shorter
    than one window simply produce an empty list and drop out of the run.
    """
    g = series.glucose
    n = len(g)
    if include_heart_rate:
        if series.heart_rate is None:
            raise WindowingError(f"{series.subject_id}: heart-rate channel required")
        matrix = np.column_stack([g, series.heart_rate])
    else:
        matrix = g.reshape(-1, 1)
    observed = ~np.isnan(g)
    windows: list[Window] = []
    for start in range(0, n - length + 1, stride):
        if not observed[start : start + length].all():
            continue
        label = int(labels[start + length - 1])
        if label == NO_LABEL:
            continue
        windows.append(
            Window(
                dataset_tag=series.dataset_tag,
                subject_id=series.subject_id,
                start_index=start,
                values=matrix[start : start + length].copy(),
                label=label,
            )
        )
    return windows


def split_counts(
    n: int, test_ratio: float = TEST_RATIO, val_ratio: float = VAL_OF_TEMP_RATIO
) -> tuple[int, int, int]:
    """(train, val, test) sizes; ceilings on the later splits keep test non-empty."""
    n_test = math.ceil(test_ratio * n)
    remainder = n - n_test
    n_val = math.ceil(val_ratio * remainder)
    return remainder - n_val, n_val, n_test


def chronological_split(
    windows: list[Window],
    test_ratio: float = TEST_RATIO,
    val_ratio: float = VAL_OF_TEMP_RATIO,
) -> tuple[dict[str, list[Window]], list[SubjectSplit]]:
    """Per-subject time-ordered split: train, then val, then test.

    Later windows go to later splits, so within every subject each training
    window precedes every validation window, which precedes every test
    window.
    """
    by_subject: dict[tuple[str, str], list[Window]] = {}
    for w in sorted(windows, key=lambda w: w.sort_key):
        by_subject.setdefault((w.dataset_tag, w.subject_id), []).append(w)
    splits: dict[str, list[Window]] = {name: [] for name in SPLIT_NAMES}
    subject_rows: list[SubjectSplit] = []
    for (tag, subject), ws in sorted(by_subject.items()):
        n_train, n_val, n_test = split_counts(len(ws), test_ratio, val_ratio)
        splits["train"].extend(ws[:n_train])
        splits["val"].extend(ws[n_train : n_train + n_val])
        splits["test"].extend(ws[n_train + n_val :])
        subject_rows.append(
            SubjectSplit(
                dataset_tag=tag,
                subject_id=subject,
                n_windows=len(ws),
                n_train=n_train,
                n_val=n_val,
                n_test=n_test,
            )
        )
    return splits, subject_rows


def undersample(
    windows: list[Window],
    label_set: tuple[int, ...],
    rng: np.random.Generator,
) -> tuple[list[Window], dict[int, list[tuple[str, str, int]]]]:
    """Reduce every class to the minority count by uniform seeded sampling.

    Windows are globally sorted before any draw, so the selection depends
    only on the window set and the generator state. Returns the balanced
    windows (ordered by class, then identifier) and the picked identifiers.
    """
    ordered = sorted(windows, key=lambda w: w.sort_key)
    by_label: dict[int, list[Window]] = {label: [] for label in label_set}
    for w in ordered:
        if w.label in by_label:
            by_label[w.label].append(w)
    empty = [label for label in label_set if not by_label[label]]
    if empty:
        raise WindowingError(f"empty class in split: {empty}")
    minority = min(len(ws) for ws in by_label.values())
    balanced: list[Window] = []
    selections: dict[int, list[tuple[str, str, int]]] = {}
    for label in sorted(label_set):
        ws = by_label[label]
        picked = sorted(rng.choice(len(ws), size=minority, replace=False).tolist())
        chosen = [ws[i] for i in picked]
        balanced.extend(chosen)
        selections[label] = [w.sort_key for w in chosen]
    return balanced, selections
