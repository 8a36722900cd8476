from __future__ import annotations

import io
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from cgmprep.ingest import ColumnSchema, IngestError, align_to_grid, inventory, parse_csv
from cgmprep.series import read_canonical_csv, write_canonical_csv

from conftest import mk_series

UTC = timezone.utc
SCHEMA = ColumnSchema(timestamp="ts", subject_id="pid", glucose="glc", heart_rate=None)
SCHEMA_HR = ColumnSchema(timestamp="ts", subject_id="pid", glucose="glc", heart_rate="hr")


def _parse(text: str, schema=SCHEMA):
    return parse_csv(io.StringIO(text), schema, dataset_tag="demo")


def test_well_formed_rows_one_subject():
    series, report = _parse(
        "ts,pid,glc\n"
        "2024-01-01T00:00:00,a,100\n"
        "2024-01-01T00:05:00,a,110\n"
        "2024-01-01T00:10:00,a,120\n"
    )
    assert len(series) == 1
    s = series[0]
    assert len(s) == 3
    assert s.missing_count("glucose") == 0
    assert list(s.glucose) == [100.0, 110.0, 120.0]
    assert report.rows_skipped == 0


def test_empty_glucose_cell_is_missing_not_zero():
    series, _ = _parse(
        "ts,pid,glc\n"
        "2024-01-01T00:00:00,a,100\n"
        "2024-01-01T00:05:00,a,\n"
        "2024-01-01T00:10:00,a,120\n"
    )
    s = series[0]
    assert len(s) == 3
    assert np.isnan(s.glucose[1])
    assert s.glucose[1] != 0.0


def test_duplicate_timestamp_keeps_first_and_counts_conflict():
    series, report = _parse(
        "ts,pid,glc\n"
        "2024-01-01T00:00:00,a,100\n"
        "2024-01-01T00:00:00,a,999\n"
        "2024-01-01T00:05:00,a,110\n"
    )
    s = series[0]
    assert len(s) == 2
    assert s.glucose[0] == 100.0
    assert report.duplicate_conflicts == 1


def test_malformed_rows_skipped_with_line_numbers():
    series, report = _parse(
        "ts,pid,glc\n"
        "not-a-time,a,100\n"
        "2024-01-01T00:00:00,a,abc\n"
        "2024-01-01T00:00:00,a,100\n"
    )
    assert report.rows_skipped == 2
    assert any("line 2" in d for d in report.diagnostics)
    assert any("line 3" in d for d in report.diagnostics)
    assert len(series) == 1 and len(series[0]) == 1


def test_epoch_seconds_accepted():
    epoch = int(datetime(2024, 1, 1, tzinfo=UTC).timestamp())
    series, _ = _parse(f"ts,pid,glc\n{epoch},a,95\n{epoch + 300},a,96\n")
    assert series[0].grid_start == datetime(2024, 1, 1, tzinfo=UTC)
    assert list(series[0].glucose) == [95.0, 96.0]


def test_schema_column_missing_raises():
    with pytest.raises(IngestError):
        _parse("time,pid,glc\n2024-01-01T00:00:00,a,100\n")


def test_align_undersamples_dense_points():
    t0 = datetime(2024, 1, 1, tzinfo=UTC)
    points = [(t0, 100.0), (t0 + timedelta(minutes=1), 999.0), (t0 + timedelta(minutes=5), 110.0)]
    s = align_to_grid(points, None, subject_id="a", dataset_tag="d")
    assert list(s.glucose) == [100.0, 110.0]


def test_align_leaves_uncovered_slot_missing():
    t0 = datetime(2024, 1, 1, tzinfo=UTC)
    s = align_to_grid([(t0, 90.0), (t0 + timedelta(minutes=10), 91.0)], None, "a", "d")
    assert len(s) == 3
    assert s.glucose[0] == 90.0 and np.isnan(s.glucose[1]) and s.glucose[2] == 91.0


def test_align_tolerance_pulls_offset_point():
    t0 = datetime(2024, 1, 1, 0, 2, tzinfo=UTC)
    s = align_to_grid([(t0, 88.0)], None, "a", "d")
    assert s.grid_start == datetime(2024, 1, 1, 0, 0, tzinfo=UTC)
    assert len(s) == 1
    assert s.glucose[0] == 88.0


def test_align_empty_input_errors():
    with pytest.raises(IngestError, match="empty series"):
        align_to_grid([], None, "a", "d")


def test_align_never_invents_values(rng):
    t0 = datetime(2024, 1, 1, tzinfo=UTC)
    offsets = np.unique(rng.integers(0, 3000, size=60))
    values = rng.uniform(50, 300, size=offsets.size)
    points = [(t0 + timedelta(seconds=int(o) * 60), float(v)) for o, v in zip(offsets, values)]
    s = align_to_grid(points, None, "a", "d")
    observed = s.glucose[~np.isnan(s.glucose)]
    assert set(observed).issubset(set(values))
    # constant 5-minute step by construction of the timestamps accessor
    stamps = list(s.timestamps())
    deltas = {(b - a).total_seconds() for a, b in zip(stamps, stamps[1:])}
    assert deltas <= {300.0}


def test_canonical_roundtrip_preserves_everything(rng):
    glucose = rng.uniform(40, 400, size=50)
    glucose[rng.integers(0, 50, size=8)] = np.nan
    hr = rng.uniform(40, 180, size=50)
    hr[rng.integers(0, 50, size=5)] = np.nan
    s = mk_series(glucose, hr)
    buf = io.StringIO()
    write_canonical_csv(s, buf)
    buf.seek(0)
    back = read_canonical_csv(buf, dataset_tag=s.dataset_tag)
    assert back.subject_id == s.subject_id
    assert back.grid_start == s.grid_start
    np.testing.assert_array_equal(back.glucose, s.glucose)
    np.testing.assert_array_equal(back.heart_rate, s.heart_rate)


def test_canonical_roundtrip_keeps_edge_missing_slots():
    g = [np.nan, np.nan, 100.0, np.nan, 90.0, np.nan]
    s = mk_series(g)
    buf = io.StringIO()
    write_canonical_csv(s, buf)
    buf.seek(0)
    back = read_canonical_csv(buf, dataset_tag="synth")
    np.testing.assert_array_equal(back.glucose, np.asarray(g))
    assert back.grid_start == s.grid_start


def test_inventory_counts():
    s1 = mk_series([100, np.nan, np.nan, np.nan, 90, 80, 70, 60, 50, 40], subject_id="a")
    inv = inventory([s1])
    row = inv.rows[0]
    assert row.samples == 10
    assert row.glucose_missing == 3
    assert row.samples - row.glucose_missing == 7
    assert row.heart_rate_missing is None


def test_inventory_empty_and_grouped():
    assert inventory([]).rows == []
    s1 = mk_series([1.0], subject_id="a", dataset_tag="d1")
    s2 = mk_series([2.0], subject_id="b", dataset_tag="d2")
    grouped = inventory([s1, s2]).by_dataset()
    assert set(grouped) == {"d1", "d2"}


def test_parse_groups_multiple_subjects_with_hr():
    series, _ = _parse(
        "ts,pid,glc,hr\n"
        "2024-01-01T00:00:00,b,100,70\n"
        "2024-01-01T00:00:00,a,90,65\n"
        "2024-01-01T00:05:00,a,95,\n",
        schema=SCHEMA_HR,
    )
    assert [s.subject_id for s in series] == ["a", "b"]
    a = series[0]
    assert a.heart_rate is not None
    assert a.heart_rate[0] == 65.0 and np.isnan(a.heart_rate[1])
