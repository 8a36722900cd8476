"""resnet_trainer: ResNet-1D benchmark trainer for exported window files."""

from .metrics import (
    ClassMetrics,
    MetricsReport,
    confusion_matrix,
    evaluate_predictions,
    metrics_from_confusion,
)
from .model import BLOCK_FILTERS, KERNEL_SIZES, audit_architecture, build_resnet1d
from .train import (
    EpochLog,
    TrainSpec,
    TrainingDiverged,
    evaluate_model,
    make_deterministic,
    predict_labels,
    train_model,
)
from .windowfile import WindowFileError, WindowFileHeader, read_window_file

__version__ = "0.1.0"
