"""Reader for the binary window interchange format.

Little-endian layout: 4-byte magic ``DIAW``, u16 version, u16 channels,
u16 window length, u32 window count, u16 label-set size (16-byte header),
then per window ``length*channels`` float32 values (sample-major) followed
by one uint8 label. Total size must be ``16 + count*(length*channels*4+1)``.

This is the trainer's only coupling to the preprocessing pipeline, so the
reader validates the contract strictly and depends on nothing else.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"DIAW"
VERSION = 1
_HEADER = struct.Struct("<4sHHHIH")
HEADER_SIZE = _HEADER.size


class WindowFileError(ValueError):
    pass


@dataclass(frozen=True)
class WindowFileHeader:
    channels: int
    length: int
    count: int
    label_set: int
    version: int = VERSION


def read_window_file(path: Path) -> tuple[np.ndarray, np.ndarray, WindowFileHeader]:
    """Return (values (count, length, channels) float32, labels uint8, header)."""
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise WindowFileError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, channels, length, count, label_set = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise WindowFileError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise WindowFileError(f"{path}: unsupported version {version}")
    record = length * channels * 4 + 1
    expected = HEADER_SIZE + count * record
    if len(data) != expected:
        raise WindowFileError(
            f"{path}: size mismatch, expected {expected} bytes for {count} windows,"
            f" found {len(data)}"
        )
    body = np.frombuffer(data, dtype=np.uint8, offset=HEADER_SIZE).reshape(count, record)
    values = body[:, :-1].copy().view("<f4").reshape(count, length, channels)
    labels = body[:, -1].copy()
    header = WindowFileHeader(
        channels=channels, length=length, count=count, label_set=label_set, version=version
    )
    return values, labels, header
