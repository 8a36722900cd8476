"""Per-class precision/recall/F1, macro averages, and the confusion matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClassMetrics:
    label: int
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    per_class: tuple[ClassMetrics, ...]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float
    confusion: np.ndarray  # [actual, predicted]


def confusion_matrix(actual, predicted, num_classes: int) -> np.ndarray:
    actual = np.asarray(actual, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if actual.shape != predicted.shape:
        raise ValueError(f"label length mismatch: {actual.shape} vs {predicted.shape}")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (actual, predicted), 1)
    return cm


def metrics_from_confusion(cm: np.ndarray) -> MetricsReport:
    """Empty classes contribute zero to the affected metric, never NaN."""
    k = cm.shape[0]
    rows: list[ClassMetrics] = []
    for c in range(k):
        tp = int(cm[c, c])
        predicted = int(cm[:, c].sum())
        actual = int(cm[c, :].sum())
        precision = tp / predicted if predicted else 0.0
        recall = tp / actual if actual else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        rows.append(ClassMetrics(label=c, precision=precision, recall=recall, f1=f1, support=actual))
    total = int(cm.sum())
    return MetricsReport(
        per_class=tuple(rows),
        macro_precision=float(np.mean([m.precision for m in rows])),
        macro_recall=float(np.mean([m.recall for m in rows])),
        macro_f1=float(np.mean([m.f1 for m in rows])),
        accuracy=float(np.trace(cm)) / total if total else 0.0,
        confusion=cm,
    )


def evaluate_predictions(actual, predicted, num_classes: int) -> MetricsReport:
    return metrics_from_confusion(confusion_matrix(actual, predicted, num_classes))


def metrics_csv(report: MetricsReport) -> str:
    lines = ["class,precision,recall,f1,support"]
    for m in report.per_class:
        lines.append(f"{m.label},{m.precision:.6f},{m.recall:.6f},{m.f1:.6f},{m.support}")
    total = sum(m.support for m in report.per_class)
    lines.append(
        f"macro,{report.macro_precision:.6f},{report.macro_recall:.6f},{report.macro_f1:.6f},{total}"
    )
    return "\n".join(lines) + "\n"


def confusion_csv(cm: np.ndarray) -> str:
    k = cm.shape[0]
    lines = ["actual\\predicted," + ",".join(str(j) for j in range(k))]
    for i in range(k):
        lines.append(f"{i}," + ",".join(str(int(v)) for v in cm[i]))
    return "\n".join(lines) + "\n"
