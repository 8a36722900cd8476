"""Statistical reporting: glucose/heart-rate rank correlation and gap histograms.

Correlation runs on cleaned, imputed, un-normalized values. Pairs with a
missing member are dropped rather than zero-filled: the zero fill is a
model-input convention and would fabricate rank structure here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .impute import LONG, MEDIUM, SHORT, find_gaps
from .label import NO_LABEL
from .series import SubjectSeries

MIN_PAIRS = 3

GAP_BUCKETS = (SHORT, MEDIUM, LONG)


@dataclass(frozen=True)
class CorrelationEntry:
    label: int | None  # None marks the overall row
    rho: float  # NaN when undefined
    n: int


@dataclass
class CorrelationReport:
    overall: CorrelationEntry
    per_class: list[CorrelationEntry] = field(default_factory=list)


@dataclass(frozen=True)
class MissingnessRow:
    dataset_tag: str
    bucket: str
    gaps_before: int
    gaps_after: int


def rank_average_ties(x: np.ndarray) -> np.ndarray:
    """Fractional ranks (1-based); tied values share their average rank."""
    x = np.asarray(x, dtype=float)
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=float)
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and x[order[j + 1]] == x[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def spearman(x: np.ndarray, y: np.ndarray) -> float:
    """Spearman's rho: Pearson correlation of average-tie fractional ranks.

    Pairs with a missing member are dropped first. Returns NaN when fewer
    than three pairs remain or either rank vector has zero variance.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise ValueError("inputs must have equal length")
    keep = ~(np.isnan(x) | np.isnan(y))
    x, y = x[keep], y[keep]
    if x.size < MIN_PAIRS:
        return math.nan
    rx = rank_average_ties(x)
    ry = rank_average_ties(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        return math.nan
    return float(rx @ ry) / denom


def per_class_correlation(
    pairs: list[tuple[SubjectSeries, np.ndarray]],
    labels_range: tuple[int, ...] = (0, 1, 2, 3, 4, 5),
) -> CorrelationReport:
    """Glucose/heart-rate rho per class and overall, pooled across subjects.

    ``pairs`` holds (series with heart rate, per-slot label array). Slots
    missing either channel are excluded from both the class groups and the
    overall figure.
    """
    g_all: list[np.ndarray] = []
    h_all: list[np.ndarray] = []
    l_all: list[np.ndarray] = []
    for series, labels in pairs:
        if series.heart_rate is None:
            raise ValueError(f"{series.subject_id}: heart-rate channel required")
        keep = ~(np.isnan(series.glucose) | np.isnan(series.heart_rate))
        keep &= labels != NO_LABEL
        g_all.append(series.glucose[keep])
        h_all.append(series.heart_rate[keep])
        l_all.append(labels[keep])
    g = np.concatenate(g_all) if g_all else np.array([])
    h = np.concatenate(h_all) if h_all else np.array([])
    lab = np.concatenate(l_all) if l_all else np.array([], dtype=int)

    overall = CorrelationEntry(label=None, rho=spearman(g, h), n=int(g.size))
    per_class = []
    for c in labels_range:
        sel = lab == c
        per_class.append(
            CorrelationEntry(label=c, rho=spearman(g[sel], h[sel]), n=int(sel.sum()))
        )
    return CorrelationReport(overall=overall, per_class=per_class)


def missingness_report(
    before: list[SubjectSeries], after: list[SubjectSeries]
) -> list[MissingnessRow]:
    """Glucose gap counts per dataset and duration bucket, pre vs post fill."""
    before_map = {s.key: s for s in before}
    after_map = {s.key: s for s in after}
    if set(before_map) != set(after_map):
        raise ValueError("before/after series sets differ")

    def tally(series_map: dict) -> dict[tuple[str, str], int]:
        counts: dict[tuple[str, str], int] = {}
        for s in series_map.values():
            for gap in find_gaps(s.glucose):
                key = (s.dataset_tag, gap.category)
                counts[key] = counts.get(key, 0) + 1
        return counts

    n_before = tally(before_map)
    n_after = tally(after_map)
    tags = sorted({tag for tag, _ in list(n_before) + list(n_after)})
    rows = []
    for tag in tags:
        for bucket in GAP_BUCKETS:
            rows.append(
                MissingnessRow(
                    dataset_tag=tag,
                    bucket=bucket,
                    gaps_before=n_before.get((tag, bucket), 0),
                    gaps_after=n_after.get((tag, bucket), 0),
                )
            )
    return rows
