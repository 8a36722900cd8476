from __future__ import annotations

import numpy as np

from resnet_trainer.model import audit_architecture, build_resnet1d


def test_three_blocks_with_kernels_8_5_3():
    model = build_resnet1d(25, 1, 5, seed=1)
    audit = audit_architecture(model)
    assert audit.residual_blocks == 3
    assert audit.kernel_sizes_per_block == ((8, 5, 3), (8, 5, 3), (8, 5, 3))


def test_no_dropout_one_softmax_head():
    audit = audit_architecture(build_resnet1d(25, 1, 5, seed=1))
    assert audit.dropout_layers == 0
    assert audit.dense_layers == 1
    assert audit.softmax_head
    assert audit.global_pooling


def test_param_count_independent_of_input_length():
    m25 = build_resnet1d(25, 1, 5, seed=1)
    m50 = build_resnet1d(50, 1, 5, seed=1)
    assert m25.count_params() == m50.count_params()


def test_softmax_rows_sum_to_one():
    model = build_resnet1d(25, 2, 5, seed=3)
    rng = np.random.Generator(np.random.PCG64(4))
    xs = rng.uniform(0, 1, size=(16, 25, 2)).astype(np.float32)
    probs = model.predict(xs, verbose=0)
    np.testing.assert_allclose(probs.sum(axis=-1), 1.0, atol=1e-6)


def test_head_follows_label_set_size():
    model = build_resnet1d(25, 2, 6, seed=1)
    out = model.predict(np.zeros((2, 25, 2), dtype=np.float32), verbose=0)
    assert out.shape == (2, 6)
