from __future__ import annotations

from datetime import datetime, timezone

import numpy as np
import pytest

from cgmprep.series import SubjectSeries

GRID0 = datetime(2024, 3, 4, 0, 0, tzinfo=timezone.utc)


def mk_series(glucose, heart_rate=None, subject_id="s1", dataset_tag="synth", start=GRID0):
    return SubjectSeries(
        subject_id=subject_id,
        dataset_tag=dataset_tag,
        grid_start=start,
        glucose=np.asarray(glucose, dtype=float),
        heart_rate=None if heart_rate is None else np.asarray(heart_rate, dtype=float),
    )


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
