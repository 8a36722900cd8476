from __future__ import annotations

import filecmp
from pathlib import Path

import numpy as np
import pytest

from cgmprep.cli import main
from cgmprep.config import ConfigError, load_config
from cgmprep.pipeline import run_pipeline
from cgmprep.windowfile import read_window_file


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("cohort")
    assert main(["make-fixture", "--out", str(root), "--subjects", "4", "--days", "5"]) == 0
    return root


@pytest.fixture(scope="module")
def full_run(fixture_dir: Path) -> Path:
    out = fixture_dir / "out"
    assert main(["all", "--config", str(fixture_dir / "pipeline.ini"), "--out", str(out), "--seed", "7"]) == 0
    return out


EXPECTED_ARTIFACTS = [
    "inventory.csv",
    "quality.csv",
    "imputation.csv",
    "impute_trace.csv",
    "normalization.csv",
    "split_manifest.txt",
    "train.dw",
    "val.dw",
    "test.dw",
    "correlation.csv",
    "missingness.csv",
    "missingness.txt",
]


def test_all_artifacts_present(full_run: Path):
    for name in EXPECTED_ARTIFACTS:
        assert (full_run / name).exists(), name
    assert list((full_run / "figures").glob("*.png"))
    assert not list(full_run.rglob("*.partial"))


def test_window_files_balanced_and_typed(full_run: Path):
    for split in ("train", "val", "test"):
        values, labels, header = read_window_file(full_run / f"{split}.dw")
        assert header.length == 25 and header.channels == 2 and header.label_set == 5
        assert values.dtype == np.float32
        counts = np.bincount(labels, minlength=5)
        assert len(set(counts.tolist())) == 1  # balanced
        assert values.min() >= 0.0 and values.max() <= 1.0  # global min-max scope


def test_stagewise_equals_all(fixture_dir: Path, full_run: Path):
    out = fixture_dir / "out_stagewise"
    config = str(fixture_dir / "pipeline.ini")
    for stage in ("ingest", "clean", "impute", "label", "windows", "analyze"):
        assert main([stage, "--config", config, "--out", str(out), "--seed", "7"]) == 0
    for name in EXPECTED_ARTIFACTS:
        assert filecmp.cmp(out / name, full_run / name, shallow=False), name


def test_same_seed_reproduces_bytes(fixture_dir: Path, full_run: Path):
    out = fixture_dir / "out_repeat"
    assert main(["all", "--config", str(fixture_dir / "pipeline.ini"), "--out", str(out), "--seed", "7"]) == 0
    compared = filecmp.cmpfiles(out, full_run, EXPECTED_ARTIFACTS, shallow=False)
    assert compared[1] == [] and compared[2] == []


def test_different_seed_changes_selection(fixture_dir: Path, full_run: Path):
    out = fixture_dir / "out_seed9"
    assert main(["all", "--config", str(fixture_dir / "pipeline.ini"), "--out", str(out), "--seed", "9"]) == 0
    assert (out / "split_manifest.txt").read_text() != (full_run / "split_manifest.txt").read_text()


def test_raw_mode_skips_cleaning(fixture_dir: Path, full_run: Path):
    out = fixture_dir / "out_raw"
    assert main(
        ["all", "--config", str(fixture_dir / "pipeline.ini"), "--out", str(out), "--seed", "7", "--raw-mode"]
    ) == 0
    raw_canonical = sorted((out / "canonical").rglob("*.csv"))
    raw_cleaned = sorted((out / "cleaned").rglob("*.csv"))
    for a, b in zip(raw_canonical, raw_cleaned):
        assert a.read_text() == b.read_text()
    assert not (out / "quality.csv").exists()
    # normalization and balancing still ran
    assert (out / "train.dw").exists() and (out / "normalization.csv").exists()
    _, labels, _ = read_window_file(out / "train.dw")
    counts = np.bincount(labels, minlength=5)
    assert len(set(counts.tolist())) == 1


def test_invalid_ratio_rejected(tmp_path: Path, fixture_dir: Path):
    bad = tmp_path / "bad.ini"
    text = (fixture_dir / "pipeline.ini").read_text().replace("test_ratio = 0.15", "test_ratio = 0")
    bad.write_text(text)
    with pytest.raises(ConfigError):
        load_config(bad)
    assert main(["all", "--config", str(bad)]) == 1


def test_stage_without_prerequisites_fails(tmp_path: Path, fixture_dir: Path):
    config = fixture_dir / "pipeline.ini"
    assert main(["clean", "--config", str(config), "--out", str(tmp_path / "nothing")]) == 1


def test_run_pipeline_api(fixture_dir: Path, tmp_path: Path):
    config = load_config(fixture_dir / "pipeline.ini").with_overrides(
        seed=3, out_dir=tmp_path / "api_out"
    )
    manifest = run_pipeline(config)
    assert manifest.seed == 3
    assert set(manifest.selections) == {"train", "val", "test"}
    assert (tmp_path / "api_out" / "train.dw").exists()
