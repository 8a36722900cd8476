"""Training protocol for the benchmark classifier.

Integer labels with sparse categorical cross-entropy, at most 50 epochs,
early stop when validation accuracy stalls for 3 consecutive epochs, and
a learning-rate halving after a 5-epoch plateau (initial 1e-4, floor
1e-6). The training set gets one seeded shuffle up front and batches are
then drawn in order, so a fixed seed reproduces a run exactly.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import keras
import numpy as np

from .metrics import MetricsReport, evaluate_predictions

logger = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainSpec:
    batch_size: int = 256
    max_epochs: int = 50
    early_stop_patience: int | None = 3
    initial_lr: float = 1e-4
    lr_patience: int = 5
    lr_factor: float = 0.5
    lr_floor: float = 1e-6
    seed: int = 0


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    loss: float
    accuracy: float
    val_loss: float
    val_accuracy: float
    learning_rate: float


def make_deterministic(seed: int) -> None:
    """Pin every RNG and force deterministic kernels; call before building."""
    keras.utils.set_random_seed(seed)
    try:
        import tensorflow as tf

        tf.config.experimental.enable_op_determinism()
    except ImportError:  # pragma: no cover - keras without the tf backend
        pass


class _LearningRateLogger(keras.callbacks.Callback):
    """Record the rate each epoch actually ran with (before any reduction)."""

    def on_epoch_end(self, epoch, logs=None):
        if logs is not None:
            logs["learning_rate"] = float(
                keras.ops.convert_to_numpy(self.model.optimizer.learning_rate)
            )


def _metric(history: dict, keys: tuple[str, ...], epoch: int) -> float:
    for key in keys:
        if key in history:
            return float(history[key][epoch])
    raise KeyError(f"none of {keys} in history ({sorted(history)})")


def train_model(
    model: keras.Model,
    train_xy: tuple[np.ndarray, np.ndarray],
    val_xy: tuple[np.ndarray, np.ndarray],
    spec: TrainSpec,
) -> list[EpochLog]:
    """Fit under the benchmark protocol and return the per-epoch history."""
    model.compile(
        optimizer=keras.optimizers.Adam(learning_rate=spec.initial_lr),
        loss="sparse_categorical_crossentropy",
        metrics=["accuracy"],
    )
    x, y = train_xy
    order = np.random.Generator(np.random.PCG64(spec.seed)).permutation(len(y))
    callbacks: list[keras.callbacks.Callback] = [_LearningRateLogger()]
    if spec.early_stop_patience is not None:
        callbacks.append(
            keras.callbacks.EarlyStopping(
                monitor="val_accuracy", mode="max", patience=spec.early_stop_patience
            )
        )
    callbacks.append(
        keras.callbacks.ReduceLROnPlateau(
            monitor="val_accuracy",
            mode="max",
            factor=spec.lr_factor,
            patience=spec.lr_patience,
            min_lr=spec.lr_floor,
        )
    )
    fitted = model.fit(
        x[order],
        y[order],
        batch_size=spec.batch_size,
        epochs=spec.max_epochs,
        validation_data=val_xy,
        shuffle=False,
        verbose=0,
        callbacks=callbacks,
    )
    h = fitted.history
    logs = [
        EpochLog(
            epoch=e,
            loss=_metric(h, ("loss",), e),
            accuracy=_metric(h, ("accuracy", "sparse_categorical_accuracy"), e),
            val_loss=_metric(h, ("val_loss",), e),
            val_accuracy=_metric(h, ("val_accuracy", "val_sparse_categorical_accuracy"), e),
            learning_rate=_metric(h, ("learning_rate",), e),
        )
        for e in range(len(h["loss"]))
    ]
    bad = [log.epoch for log in logs if not np.isfinite(log.loss)]
    if bad:
        raise TrainingDiverged(f"non-finite training loss at epoch {bad[0]}")
    return logs


def predict_labels(model: keras.Model, xs: np.ndarray, batch_size: int = 256) -> np.ndarray:
    probs = model.predict(xs, batch_size=batch_size, verbose=0)
    return np.argmax(probs, axis=-1)


def evaluate_model(
    model: keras.Model, test_xy: tuple[np.ndarray, np.ndarray], num_classes: int, batch_size: int = 256
) -> MetricsReport:
    xs, ys = test_xy
    return evaluate_predictions(ys, predict_labels(model, xs, batch_size), num_classes)


def history_csv(history: list[EpochLog]) -> str:
    lines = ["epoch,loss,accuracy,val_loss,val_accuracy,learning_rate"]
    for h in history:
        lines.append(
            f"{h.epoch},{h.loss:.6f},{h.accuracy:.6f},{h.val_loss:.6f},"
            f"{h.val_accuracy:.6f},{h.learning_rate:.3e}"
        )
    return "\n".join(lines) + "\n"
