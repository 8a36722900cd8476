"""The 1-D residual classifier.

Three blocks of three convolutions with kernel sizes 8/5/3 (64/128/128
filters), batch normalization after every convolution, ReLU after the
first two and after the residual add on the third, a 1x1 projection
shortcut wherever channel widths change, global average pooling, and a
single softmax head. He-normal kernel initialization throughout; no
dropout, no intermediate dense layers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import keras
from keras import layers

BLOCK_FILTERS = (64, 128, 128)
KERNEL_SIZES = (8, 5, 3)


def build_resnet1d(
    input_length: int, channels: int, num_classes: int, seed: int = 0
) -> keras.Model:
    seeds = itertools.count(seed)

    def init() -> keras.initializers.HeNormal:
        return keras.initializers.HeNormal(seed=next(seeds))

    inputs = keras.Input(shape=(input_length, channels))
    x = inputs
    width = channels
    for filters in BLOCK_FILTERS:
        y = x
        for i, kernel in enumerate(KERNEL_SIZES):
            y = layers.Conv1D(
                filters, kernel, padding="same", use_bias=False, kernel_initializer=init()
            )(y)
            y = layers.BatchNormalization()(y)
            if i < len(KERNEL_SIZES) - 1:
                y = layers.Activation("relu")(y)
        shortcut = x
        if width != filters:
            shortcut = layers.Conv1D(
                filters, 1, padding="same", use_bias=False, kernel_initializer=init()
            )(x)
            shortcut = layers.BatchNormalization()(shortcut)
        x = layers.Add()([y, shortcut])
        x = layers.Activation("relu")(x)
        width = filters
    pooled = layers.GlobalAveragePooling1D()(x)
    outputs = layers.Dense(num_classes, activation="softmax", kernel_initializer=init())(pooled)
    return keras.Model(inputs, outputs)


@dataclass(frozen=True)
class ArchitectureAudit:
    residual_blocks: int
    kernel_sizes_per_block: tuple[tuple[int, ...], ...]
    dropout_layers: int
    dense_layers: int
    softmax_head: bool
    global_pooling: bool


def audit_architecture(model: keras.Model) -> ArchitectureAudit:
    """Structural audit for the release checks.

    Counts residual blocks by their merge layers and collects the kernel
    sizes of each block's main path; 1x1 shortcut projections are excluded.
    """
    per_block: list[tuple[int, ...]] = []
    current: list[int] = []
    dropout = 0
    dense = 0
    softmax_head = False
    pooling = False
    blocks = 0
    for layer in model.layers:
        if isinstance(layer, layers.Conv1D):
            size = layer.kernel_size[0]
            if size > 1:
                current.append(size)
        elif isinstance(layer, layers.Add):
            blocks += 1
            per_block.append(tuple(current))
            current = []
        elif isinstance(layer, layers.Dropout):
            dropout += 1
        elif isinstance(layer, layers.Dense):
            dense += 1
            softmax_head = getattr(layer.activation, "__name__", "") == "softmax"
        elif isinstance(layer, layers.GlobalAveragePooling1D):
            pooling = True
    return ArchitectureAudit(
        residual_blocks=blocks,
        kernel_sizes_per_block=tuple(per_block),
        dropout_layers=dropout,
        dense_layers=dense,
        softmax_head=softmax_head,
        global_pooling=pooling,
    )
