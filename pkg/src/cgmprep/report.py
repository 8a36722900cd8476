"""Render report figures from the delimited artifacts.

Reads the CSVs the analyze stage wrote and drops PNGs next to them under
``figures/``: per-dataset gap histograms (before vs after imputation) and
the linear-vs-rational fill comparison traces.
"""

from __future__ import annotations

import csv
import logging
import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import GAP_BUCKETS
from .config import PipelineConfig

logger = logging.getLogger(__name__)

BUCKET_LABELS = {"short": "5-25 min", "medium": "30-115 min", "long": "120+ min"}


def _savefig(fig, path: Path) -> None:
    tmp = path.with_suffix(path.suffix + ".partial")
    fig.savefig(tmp, format="png", dpi=120)
    plt.close(fig)
    os.replace(tmp, path)


def render_missingness(out_dir: Path) -> list[Path]:
    src = out_dir / "missingness.csv"
    if not src.exists():
        return []
    per_tag: dict[str, dict[str, tuple[int, int]]] = {}
    with src.open() as fh:
        for row in csv.DictReader(fh):
            per_tag.setdefault(row["dataset_tag"], {})[row["bucket"]] = (
                int(row["gaps_before"]),
                int(row["gaps_after"]),
            )
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for tag, buckets in sorted(per_tag.items()):
        before = [buckets.get(b, (0, 0))[0] for b in GAP_BUCKETS]
        after = [buckets.get(b, (0, 0))[1] for b in GAP_BUCKETS]
        x = np.arange(len(GAP_BUCKETS))
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.bar(x - 0.2, before, width=0.4, label="before imputation", color="#c44e52")
        ax.bar(x + 0.2, after, width=0.4, label="after imputation", color="#4c72b0")
        ax.set_xticks(x)
        ax.set_xticklabels([BUCKET_LABELS[b] for b in GAP_BUCKETS])
        ax.set_ylabel("glucose gaps")
        ax.set_title(f"Missing-run durations: {tag}")
        ax.legend()
        fig.tight_layout()
        path = fig_dir / f"missingness_{tag}.png"
        _savefig(fig, path)
        written.append(path)
    return written


def render_impute_traces(out_dir: Path) -> list[Path]:
    src = out_dir / "impute_trace.csv"
    if not src.exists():
        return []
    traces: dict[tuple[str, str], list[dict]] = {}
    with src.open() as fh:
        for row in csv.DictReader(fh):
            traces.setdefault((row["subject_id"], row["channel"]), []).append(row)
    fig_dir = out_dir / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for (subject, channel), rows in sorted(traces.items()):
        idx = np.array([int(r["index"]) for r in rows])
        span = np.arange(idx.min(), idx.max() + 1)
        raw = np.full(span.size, np.nan)
        lin = np.full(span.size, np.nan)
        stine = np.full(span.size, np.nan)
        for r in rows:
            k = int(r["index"]) - span[0]
            raw[k] = float(r["raw"]) if r["raw"] else np.nan
            lin[k] = float(r["linear"]) if r["linear"] else np.nan
            stine[k] = float(r["stineman"]) if r["stineman"] else np.nan
        fig, ax = plt.subplots(figsize=(9, 4))
        ax.plot(span, lin, "--", color="#dd8452", label="linear fill")
        ax.plot(span, stine, "-", color="#4c72b0", label="rational fill")
        ax.plot(span, raw, "o", ms=3.5, color="#2f2f2f", label="observed")
        ax.set_xlabel("grid index (5-min steps)")
        ax.set_ylabel(channel)
        ax.set_title(f"Gap fills: {subject} / {channel}")
        ax.legend()
        fig.tight_layout()
        path = fig_dir / f"impute_trace_{subject}_{channel}.png"
        _savefig(fig, path)
        written.append(path)
    return written


def render_all(config: PipelineConfig) -> list[Path]:
    written = render_missingness(config.out_dir)
    written += render_impute_traces(config.out_dir)
    logger.info("stage analyze: %d figures rendered", len(written))
    return written
