"""cgmprep: quality refinement and benchmark preparation for CGM time series."""

from .analysis import CorrelationReport, MissingnessRow, per_class_correlation, spearman
from .config import PipelineConfig, load_config
from .impute import GapSegment, ImputePolicy, find_gaps, impute_all, linear_fill, stineman_fill, stineman_slopes
from .ingest import ColumnSchema, align_to_grid, inventory, parse_csv
from .label import LabeledSample, assign_classes, label_array
from .pipeline import run_pipeline
from .quality import PhysiologicalBounds, iqr_fences, mask_outliers, mask_zeros
from .series import SubjectSeries, read_canonical_csv, write_canonical_csv
from .windowfile import read_window_file, write_window_file
from .windows import (
    NormalizationParams,
    SplitManifest,
    Window,
    chronological_split,
    fill_hr_zero,
    fit_normalization,
    generate_windows,
    undersample,
)

__version__ = "0.1.0"
