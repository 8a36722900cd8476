"""Time-to-hypoglycemia class assignment on the contiguous grid.

Class 0 marks a hypoglycemic sample itself (glucose at or below the
threshold). Classes 1-4 bucket the lead time to the nearest future
hypoglycemic sample; class 5 means no such sample within two hours.
Distances are purely positional: missing slots in between still count
grid steps, the windowing stage is what excludes gapped stretches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import GRID_STEP_MINUTES, SubjectSeries

HYPO_THRESHOLD_MGDL = 70.0
HORIZON_STEPS = 24  # 120 minutes

# Upper lead-time bound (in grid steps) for classes 1..4; class 5 is beyond.
_CLASS_STEP_BOUNDS = ((1, 2), (2, 5), (3, 11), (4, HORIZON_STEPS))

NO_LABEL = -1


@dataclass(frozen=True)
class LabeledSample:
    """One observed grid sample with its onset-proximity class."""

    index: int
    glucose: float
    label: int
    minutes_to_onset: int | None


def _label_from_steps(steps_ahead: int | None) -> int:
    if steps_ahead is None:
        return 5
    for label, bound in _CLASS_STEP_BOUNDS:
        if steps_ahead <= bound:
            return label
    return 5


def label_array(glucose: np.ndarray, threshold: float = HYPO_THRESHOLD_MGDL) -> np.ndarray:
    """Per-slot class labels; missing slots get NO_LABEL.

    A single backward sweep tracks the index of the next hypoglycemic
    sample, so every sample's lead time refers to its nearest future event.
    """
    g = np.asarray(glucose, dtype=float)
    n = g.size
    labels = np.full(n, NO_LABEL, dtype=np.int64)
    next_onset = -1
    for i in range(n - 1, -1, -1):
        if np.isnan(g[i]):
            continue
        if g[i] <= threshold:
            labels[i] = 0
            next_onset = i
            continue
        steps = (next_onset - i) if next_onset >= 0 else None
        labels[i] = _label_from_steps(steps)
    return labels


def assign_classes(
    series: SubjectSeries, threshold: float = HYPO_THRESHOLD_MGDL
) -> list[LabeledSample]:
    """Labeled samples for every observed glucose slot, in grid order."""
    g = series.glucose
    labels = label_array(g, threshold)
    out: list[LabeledSample] = []
    next_onset = -1
    minutes = np.full(len(g), -1, dtype=np.int64)
    for i in range(len(g) - 1, -1, -1):
        if np.isnan(g[i]):
            continue
        if g[i] <= threshold:
            next_onset = i
            minutes[i] = 0
        elif next_onset >= 0:
            minutes[i] = (next_onset - i) * GRID_STEP_MINUTES
    for i in range(len(g)):
        if labels[i] == NO_LABEL:
            continue
        out.append(
            LabeledSample(
                index=i,
                glucose=float(g[i]),
                label=int(labels[i]),
                minutes_to_onset=int(minutes[i]) if minutes[i] >= 0 else None,
            )
        )
    return out
