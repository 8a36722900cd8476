"""Trainer release criteria, one PASS/FAIL line each (run with ``pytest -s``)."""

from __future__ import annotations

import numpy as np

from resnet_trainer.model import audit_architecture, build_resnet1d
from resnet_trainer.train import TrainSpec, evaluate_model, make_deterministic, train_model
from resnet_trainer.windowfile import read_window_file

from conftest import FIXTURES, noise_data, separable_data


def _report(name: str, ok: bool) -> None:
    print(f"[ACCEPT] {name}: {'PASS' if ok else 'FAIL'}")
    assert ok, name


def test_architecture_audit():
    audit = audit_architecture(build_resnet1d(25, 1, 5, seed=1))
    ok = (
        audit.residual_blocks == 3
        and audit.kernel_sizes_per_block == ((8, 5, 3), (8, 5, 3), (8, 5, 3))
        and audit.dropout_layers == 0
        and audit.dense_layers == 1  # the softmax head only
        and audit.softmax_head
        and audit.global_pooling
    )
    _report("architecture: 3 blocks, kernels 8/5/3, no dropout, softmax head only", bool(ok))


def test_softmax_normalization():
    make_deterministic(2)
    model = build_resnet1d(25, 2, 5, seed=2)
    rng = np.random.Generator(np.random.PCG64(2))
    xs = rng.uniform(0, 1, size=(64, 25, 2)).astype(np.float32)
    sums = model.predict(xs, verbose=0).sum(axis=-1)
    err = float(np.max(np.abs(sums - 1.0)))
    _report(f"softmax rows sum to 1 (max err {err:.1e})", err <= 1e-6)


def test_overfit_separable_fixture():
    make_deterministic(3)
    x, y = separable_data(per_class=40, seed=1)  # 200 windows
    model = build_resnet1d(25, 1, 5, seed=3)
    history = train_model(
        model,
        (x, y),
        (x, y),
        TrainSpec(batch_size=32, max_epochs=200, early_stop_patience=None, initial_lr=1e-3, seed=3),
    )
    best = max(h.accuracy for h in history)
    ok = best >= 0.95 and len(history) <= 200
    _report(f"overfit 200-window fixture: train acc {best:.3f} in {len(history)} epochs", bool(ok))


def test_label_shuffled_accuracy_at_chance():
    make_deterministic(13)
    x, y = noise_data(per_class=50, seed=11)
    tx, ty = noise_data(per_class=200, seed=12)  # 1000 balanced test windows
    model = build_resnet1d(25, 1, 5, seed=13)
    train_model(
        model,
        (x, y),
        (x, y),
        TrainSpec(batch_size=64, max_epochs=3, early_stop_patience=None, seed=13),
    )
    acc = evaluate_model(model, (tx, ty), 5).accuracy
    _report(f"label-shuffled baseline accuracy {acc:.3f} within [0.15, 0.25]", 0.15 <= acc <= 0.25)


def test_runs_from_pipeline_window_files():
    make_deterministic(21)
    train_x, train_y, hdr = read_window_file(FIXTURES / "train.dw")
    val_x, val_y, _ = read_window_file(FIXTURES / "val.dw")
    test_x, test_y, _ = read_window_file(FIXTURES / "test.dw")
    model = build_resnet1d(hdr.length, hdr.channels, hdr.label_set, seed=21)
    history = train_model(
        model, (train_x, train_y), (val_x, val_y), TrainSpec(batch_size=64, max_epochs=2, seed=21)
    )
    report = evaluate_model(model, (test_x, test_y), hdr.label_set)
    supports = {m.support for m in report.per_class}
    ok = (
        1 <= len(history) <= 2
        and all(np.isfinite(h.loss) and np.isfinite(h.val_accuracy) for h in history)
        and report.confusion.shape == (5, 5)
        and len(supports) == 1
    )
    _report("trainer runs end to end from pipeline window files", bool(ok))
