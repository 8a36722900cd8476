from __future__ import annotations

import numpy as np
import pytest

from cgmprep.quality import (
    InsufficientDataError,
    PhysiologicalBounds,
    apply_quality,
    iqr_fences,
    mask_outliers,
    mask_zeros,
)

from conftest import mk_series

BOUNDS = PhysiologicalBounds()


def oracle_fences(values: np.ndarray):
    """Independent order-statistics oracle (numpy's linear-interpolation quantile)."""
    q1 = float(np.percentile(values, 25))
    q3 = float(np.percentile(values, 75))
    iqr = q3 - q1
    return q1, q3, q1 - 1.5 * iqr, q3 + 1.5 * iqr


def test_fences_small_example():
    assert iqr_fences(np.array([1.0, 2.0, 3.0, 4.0])) == (1.75, 3.25, -0.5, 5.5)


def test_fences_degenerate_all_equal():
    q1, q3, lo, hi = iqr_fences(np.full(10, 7.0))
    assert q1 == q3 == lo == hi == 7.0


def test_fences_match_oracle_on_random_arrays(rng):
    for _ in range(200):
        n = int(rng.integers(4, 500))
        values = rng.normal(100, 40, size=n)
        got = iqr_fences(values)
        want = oracle_fences(values)
        np.testing.assert_allclose(got, want, rtol=0, atol=1e-12)


def test_fences_require_four_values():
    with pytest.raises(InsufficientDataError):
        iqr_fences(np.array([1.0, 2.0, 3.0]))


def test_mask_zeros_both_channels():
    s = mk_series([0.0, 100.0, 0.0], heart_rate=[0.0, 72.0, 80.0])
    out, counts = mask_zeros(s)
    assert np.isnan(out.glucose[0]) and np.isnan(out.glucose[2])
    assert out.glucose[1] == 100.0
    assert np.isnan(out.heart_rate[0]) and out.heart_rate[1] == 72.0
    assert counts == {"glucose": 2, "heart_rate": 1}


def test_mask_zeros_identity_when_clean():
    s = mk_series([100.0, 110.0])
    out, counts = mask_zeros(s)
    np.testing.assert_array_equal(out.glucose, s.glucose)
    assert counts == {"glucose": 0}


def test_hard_bounds_masked_boundaries_survive():
    # 3 observed values per series: too few for quartiles, so only the hard
    # bounds act; boundary values themselves must survive
    masked_g, _ = mask_outliers(mk_series([39.0, 100.0, 501.0]), BOUNDS)
    assert np.isnan(masked_g.glucose[0]) and np.isnan(masked_g.glucose[2])
    assert masked_g.glucose[1] == 100.0

    kept_g, _ = mask_outliers(mk_series([40.0, 100.0, 500.0]), BOUNDS)
    assert list(kept_g.glucose) == [40.0, 100.0, 500.0]

    masked_h, _ = mask_outliers(mk_series([100.0, 100.0, 100.0], heart_rate=[29.0, 72.0, 201.0]), BOUNDS)
    assert np.isnan(masked_h.heart_rate[0]) and np.isnan(masked_h.heart_rate[2])

    kept_h, _ = mask_outliers(mk_series([100.0, 100.0, 100.0], heart_rate=[30.0, 72.0, 200.0]), BOUNDS)
    assert list(kept_h.heart_rate) == [30.0, 72.0, 200.0]


def test_single_extreme_value_is_the_only_exclusion(rng):
    values = np.concatenate([rng.uniform(80, 120, size=60), [600.0]])
    s = mk_series(values)
    out, rows = mask_outliers(s, BOUNDS)
    assert np.isnan(out.glucose[-1])
    assert np.isnan(out.glucose).sum() == 1
    row = rows[0]
    # 600 breaks the hard max as well as the fence, so it counts under bounds
    assert row.bounds_masked == 1 and row.iqr_masked == 0
    _, _, lo, hi = oracle_fences(values)
    assert row.lower_fence == pytest.approx(lo) and row.upper_fence == pytest.approx(hi)


def test_fence_only_outlier_counts_as_iqr():
    values = np.concatenate([np.linspace(95, 105, 40), [480.0]])
    out, rows = mask_outliers(mk_series(values), BOUNDS)
    assert np.isnan(out.glucose[-1])
    assert rows[0].iqr_masked == 1 and rows[0].bounds_masked == 0


def test_quality_only_adds_missing(rng):
    values = rng.uniform(30, 520, size=300)
    values[rng.integers(0, 300, size=30)] = np.nan
    s = mk_series(values)
    out, _ = apply_quality(s, BOUNDS)
    before = np.isnan(s.glucose)
    after = np.isnan(out.glucose)
    assert (after | before).sum() == after.sum()  # monotone: mask only grows
    surviving = ~after
    np.testing.assert_array_equal(out.glucose[surviving], s.glucose[surviving])


def test_survivors_within_effective_limits(rng):
    values = rng.normal(150, 80, size=500)
    s = mk_series(values)
    out, rows = apply_quality(s, BOUNDS)
    row = rows[0]
    kept = out.glucose[~np.isnan(out.glucose)]
    assert kept.min() >= max(BOUNDS.glucose_min, row.lower_fence)
    assert kept.max() <= min(BOUNDS.glucose_max, row.upper_fence)


def test_quality_idempotent_on_smooth_series(rng):
    # daily-profile-like bulk with gross artifacts: fences land beyond the
    # bulk's range, so a second pass finds nothing new
    t = np.arange(2000)
    values = 150 + 40 * np.sin(2 * np.pi * t / 288) + rng.normal(0, 3, size=2000)
    values[rng.integers(0, 2000, size=5)] = 0.0
    values[rng.integers(0, 2000, size=5)] = 600.0
    values[rng.integers(0, 2000, size=4)] = 20.0
    s = mk_series(values)
    once, _ = apply_quality(s, BOUNDS)
    twice, _ = apply_quality(once, BOUNDS)
    np.testing.assert_array_equal(np.isnan(once.glucose), np.isnan(twice.glucose))
    np.testing.assert_array_equal(
        once.glucose[~np.isnan(once.glucose)], twice.glucose[~np.isnan(twice.glucose)]
    )


def test_fences_skipped_but_bounds_still_apply():
    s = mk_series([39.0, np.nan, 100.0])
    out, rows = mask_outliers(s, BOUNDS)
    assert np.isnan(out.glucose[0])
    assert rows[0].q1 is None and rows[0].lower_fence is None
    assert rows[0].bounds_masked == 1


def test_bounds_validation():
    with pytest.raises(ValueError):
        PhysiologicalBounds(glucose_min=500, glucose_max=40)
