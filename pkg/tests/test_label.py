from __future__ import annotations

import numpy as np

from cgmprep.label import NO_LABEL, assign_classes, label_array

from conftest import mk_series


def oracle_labels(glucose: np.ndarray, threshold: float = 70.0) -> np.ndarray:
    """Brute force: scan up to 24 slots ahead for the nearest onset."""
    n = glucose.size
    out = np.full(n, NO_LABEL, dtype=np.int64)
    for i in range(n):
        g = glucose[i]
        if np.isnan(g):
            continue
        if g <= threshold:
            out[i] = 0
            continue
        label = 5
        for d in range(1, 25):
            if i + d < n and not np.isnan(glucose[i + d]) and glucose[i + d] <= threshold:
                if d <= 2:
                    label = 1
                elif d <= 5:
                    label = 2
                elif d <= 11:
                    label = 3
                else:
                    label = 4
                break
        out[i] = label
    return out


def test_threshold_boundary():
    labels = label_array(np.array([70.0, 70.5]))
    assert labels[0] == 0
    assert labels[1] == 5


def test_backward_ranges_from_single_event():
    # event at the last slot; positions k-1..k-25 walk through every class
    n = 26
    g = np.full(n, 120.0)
    g[-1] = 65.0
    labels = label_array(g)
    event = n - 1
    assert labels[event] == 0
    assert all(labels[event - d] == 1 for d in (1, 2))
    assert all(labels[event - d] == 2 for d in (3, 4, 5))
    assert all(labels[event - d] == 3 for d in range(6, 12))
    assert all(labels[event - d] == 4 for d in range(12, 25))
    assert labels[0] == 5  # 125 minutes ahead


def test_nearest_event_wins():
    # sample 10 min before one event and 90 min before another -> class 1
    g = np.full(40, 150.0)
    g[12] = 60.0
    g[28] = 60.0
    labels = label_array(g)
    assert labels[10] == 1
    # just past the first event, distance restarts against the second one
    assert labels[13] == 4  # 75 min before index 28


def test_consecutive_hypo_run_all_class0():
    g = np.array([80.0, 65.0, 60.0, 68.0, 90.0])
    labels = label_array(g)
    assert list(labels[1:4]) == [0, 0, 0]
    assert labels[0] == 1


def test_missing_slots_get_no_label_but_count_distance():
    g = np.array([120.0, np.nan, np.nan, 65.0])
    labels = label_array(g)
    assert labels[0] == 2  # 15 minutes through the gap
    assert labels[1] == NO_LABEL and labels[2] == NO_LABEL


def test_matches_oracle_on_random_series(rng):
    for _ in range(300):
        n = int(rng.integers(1, 120))
        g = rng.uniform(55, 220, size=n)
        g[rng.uniform(size=n) < 0.15] = np.nan
        np.testing.assert_array_equal(label_array(g), oracle_labels(g))


def test_partition_every_observed_sample_labeled(rng):
    g = rng.uniform(50, 250, size=500)
    g[rng.uniform(size=500) < 0.2] = np.nan
    labels = label_array(g)
    observed = ~np.isnan(g)
    assert (labels[observed] >= 0).all() and (labels[observed] <= 5).all()
    assert (labels[~observed] == NO_LABEL).all()


def test_monotone_approach_between_events(rng):
    g = np.full(60, 150.0)
    g[40] = 60.0
    labels = label_array(g)
    # walking toward the event inside the 2-hour horizon, classes never increase
    within = labels[16:40]
    assert all(a >= b for a, b in zip(within, within[1:]))


def test_threshold_sensitivity_monotone(rng):
    g = rng.uniform(50, 250, size=400)
    low = (label_array(g, threshold=70.0) == 0).sum()
    high = (label_array(g, threshold=90.0) == 0).sum()
    assert high >= low


def test_assign_classes_minutes_to_onset():
    g = np.array([120.0, 110.0, 65.0, 130.0])
    samples = assign_classes(mk_series(g))
    by_index = {s.index: s for s in samples}
    assert by_index[0].minutes_to_onset == 10 and by_index[0].label == 1
    assert by_index[1].minutes_to_onset == 5 and by_index[1].label == 1
    assert by_index[2].minutes_to_onset == 0 and by_index[2].label == 0
    assert by_index[3].minutes_to_onset is None and by_index[3].label == 5
