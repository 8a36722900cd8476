"""Pipeline configuration: INI-style key/value sections with paper defaults."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .ingest import ColumnSchema
from .label import HYPO_THRESHOLD_MGDL
from .quality import PhysiologicalBounds
from .windows import TEST_RATIO, VAL_OF_TEMP_RATIO, WINDOW_LENGTH

GLUCOSE_ONLY = "glucose"
GLUCOSE_HR = "glucose+hr"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    input_path: Path
    out_dir: Path
    schema: ColumnSchema = field(default_factory=ColumnSchema)
    dataset_tag: str | None = None  # None: one tag per input file stem
    channels: str = GLUCOSE_ONLY
    hypo_threshold: float = HYPO_THRESHOLD_MGDL
    bounds: PhysiologicalBounds = field(default_factory=PhysiologicalBounds)
    window_length: int = WINDOW_LENGTH
    stride: int = 1
    test_ratio: float = TEST_RATIO
    val_ratio: float = VAL_OF_TEMP_RATIO
    seed: int = 0
    normalization_scope: str = "global"
    include_class5: bool = False
    raw_mode: bool = False
    impute_mode: str = "mixed"
    trace_subjects: int = 1  # subjects to include in the fill-comparison trace
    workers: int = 1

    def __post_init__(self) -> None:
        if not (0 < self.test_ratio < 1) or not (0 < self.val_ratio < 1):
            raise ConfigError("split ratios must lie in (0, 1)")
        if self.window_length < 2:
            raise ConfigError("window length must be >= 2")
        if self.stride < 1:
            raise ConfigError("stride must be >= 1")
        if self.channels not in (GLUCOSE_ONLY, GLUCOSE_HR):
            raise ConfigError(f"channels must be {GLUCOSE_ONLY!r} or {GLUCOSE_HR!r}")
        if self.hypo_threshold <= 0:
            raise ConfigError("hypoglycemia threshold must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def label_set(self) -> tuple[int, ...]:
        return (0, 1, 2, 3, 4, 5) if self.include_class5 else (0, 1, 2, 3, 4)

    @property
    def include_heart_rate(self) -> bool:
        return self.channels == GLUCOSE_HR

    def with_overrides(
        self,
        seed: int | None = None,
        out_dir: Path | None = None,
        raw_mode: bool | None = None,
        workers: int | None = None,
    ) -> "PipelineConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        if out_dir is not None:
            cfg = replace(cfg, out_dir=out_dir)
        if raw_mode is not None:
            cfg = replace(cfg, raw_mode=raw_mode)
        if workers is not None:
            cfg = replace(cfg, workers=workers)
        return cfg


def _get(parser: configparser.ConfigParser, section: str, key: str, default):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key).strip()
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def load_config(path: Path) -> PipelineConfig:
    """Read a pipeline config file; unknown keys are rejected."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")

    known = {
        "input": {"path", "dataset_tag", "channels"},
        "schema": {"timestamp", "subject_id", "glucose", "heart_rate"},
        "quality": {"glucose_min", "glucose_max", "heart_rate_min", "heart_rate_max"},
        "impute": {"mode"},
        "label": {"hypo_threshold"},
        "windows": {
            "length",
            "stride",
            "test_ratio",
            "val_ratio",
            "seed",
            "normalization_scope",
            "include_class5",
        },
        "output": {"dir", "trace_subjects"},
    }
    for section in parser.sections():
        if section not in known:
            raise ConfigError(f"unknown config section [{section}]")
        extra = set(parser.options(section)) - known[section]
        if extra:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(extra)}")

    if not parser.has_option("input", "path"):
        raise ConfigError("missing required key: [input] path")
    base = path.parent
    input_path = (base / parser.get("input", "path")).resolve()
    out_dir = Path(_get(parser, "output", "dir", "out"))
    if not out_dir.is_absolute():
        out_dir = (base / out_dir).resolve()

    hr_col = _get(parser, "schema", "heart_rate", "")
    schema = ColumnSchema(
        timestamp=_get(parser, "schema", "timestamp", "timestamp"),
        subject_id=_get(parser, "schema", "subject_id", "subject_id"),
        glucose=_get(parser, "schema", "glucose", "glucose"),
        heart_rate=hr_col or None,
    )
    bounds = PhysiologicalBounds(
        glucose_min=_get(parser, "quality", "glucose_min", 40.0),
        glucose_max=_get(parser, "quality", "glucose_max", 500.0),
        heart_rate_min=_get(parser, "quality", "heart_rate_min", 30.0),
        heart_rate_max=_get(parser, "quality", "heart_rate_max", 200.0),
    )
    try:
        return PipelineConfig(
            input_path=input_path,
            out_dir=out_dir,
            schema=schema,
            dataset_tag=_get(parser, "input", "dataset_tag", "") or None,
            channels=_get(parser, "input", "channels", GLUCOSE_ONLY),
            hypo_threshold=_get(parser, "label", "hypo_threshold", HYPO_THRESHOLD_MGDL),
            bounds=bounds,
            window_length=_get(parser, "windows", "length", WINDOW_LENGTH),
            stride=_get(parser, "windows", "stride", 1),
            test_ratio=_get(parser, "windows", "test_ratio", TEST_RATIO),
            val_ratio=_get(parser, "windows", "val_ratio", VAL_OF_TEMP_RATIO),
            seed=_get(parser, "windows", "seed", 0),
            normalization_scope=_get(parser, "windows", "normalization_scope", "global"),
            include_class5=_get(parser, "windows", "include_class5", False),
            impute_mode=_get(parser, "impute", "mode", "mixed"),
            trace_subjects=_get(parser, "output", "trace_subjects", 1),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def write_default_config(path: Path, input_path: str, channels: str = GLUCOSE_HR) -> None:
    """Emit a config file with every tunable present at its default."""
    text = f"""[input]
path = {input_path}
channels = {channels}

[schema]
timestamp = timestamp
subject_id = subject_id
glucose = glucose
heart_rate = heart_rate

[quality]
glucose_min = 40
glucose_max = 500
heart_rate_min = 30
heart_rate_max = 200

[impute]
mode = mixed

[label]
hypo_threshold = 70

[windows]
length = 25
stride = 1
test_ratio = 0.15
val_ratio = 0.1765
seed = 0
normalization_scope = global
include_class5 = false

[output]
dir = out
trace_subjects = 1
"""
    if channels == GLUCOSE_ONLY:
        text = text.replace("heart_rate = heart_rate\n", "")
    path.write_text(text)
