from __future__ import annotations

import os
from pathlib import Path

os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "2")

import numpy as np
import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session", autouse=True)
def _deterministic_tf():
    from resnet_trainer.train import make_deterministic

    make_deterministic(0)


def separable_data(per_class: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Windows whose mean level encodes the class; trivially separable."""
    rng = np.random.Generator(np.random.PCG64(seed))
    count = per_class * 5
    labels = np.arange(count) % 5
    base = 0.1 + labels * 0.18
    values = base[:, None, None] + rng.uniform(-0.01, 0.01, size=(count, 25, 1))
    return values.astype(np.float32), labels.astype(np.uint8)


def noise_data(per_class: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Pure-noise windows with balanced labels: nothing to learn."""
    rng = np.random.Generator(np.random.PCG64(seed))
    count = per_class * 5
    labels = (np.arange(count) % 5).astype(np.uint8)
    values = rng.uniform(0, 1, size=(count, 25, 1)).astype(np.float32)
    return values, labels
