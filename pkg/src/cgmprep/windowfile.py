"""Binary window-file interchange format.

Layout, all little-endian:

    offset  size  field
    0       4     magic ``DIAW``
    4       2     format version (currently 1)
    6       2     channel count
    8       2     window length (samples per channel)
    10      4     window count
    14      2     label set size
    16      ...   per window: length*channels float32 (row-major, sample
                  index outer, channel inner) followed by one uint8 label

Total size must equal ``16 + count * (length*channels*4 + 1)``.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"DIAW"
VERSION = 1
_HEADER = struct.Struct("<4sHHHIH")
HEADER_SIZE = _HEADER.size  # 16


class WindowFileError(ValueError):
    pass


@dataclass(frozen=True)
class WindowFileHeader:
    channels: int
    length: int
    count: int
    label_set: int
    version: int = VERSION


def write_window_file(
    path: Path,
    values: np.ndarray,
    labels: np.ndarray,
    label_set: int,
) -> None:
    """Write windows of shape (count, length, channels) plus uint8 labels.

    The file is written to a ``.partial`` sibling and renamed into place,
    so a crash never leaves a plausible-looking truncated file behind.
    """
    values = np.asarray(values, dtype=np.float32)
    labels = np.asarray(labels)
    if values.ndim != 3:
        raise WindowFileError(f"values must be (count, length, channels), got {values.shape}")
    count, length, channels = values.shape
    if labels.shape != (count,):
        raise WindowFileError("labels length must match window count")
    if not np.isfinite(values).all():
        raise WindowFileError("window values must be finite")
    if labels.size and (labels.min() < 0 or labels.max() > 255):
        raise WindowFileError("labels must fit in one unsigned byte")

    header = _HEADER.pack(MAGIC, VERSION, channels, length, count, label_set)
    record_floats = length * channels
    tmp = path.with_suffix(path.suffix + ".partial")
    with tmp.open("wb") as fh:
        fh.write(header)
        for i in range(count):
            fh.write(values[i].reshape(record_floats).tobytes())
            fh.write(bytes([int(labels[i])]))
    os.replace(tmp, path)


def read_window_file(path: Path) -> tuple[np.ndarray, np.ndarray, WindowFileHeader]:
    """Read and validate a window file; returns (values, labels, header)."""
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
    values = np.empty((count, length, channels), dtype=np.float32)
    labels = np.empty(count, dtype=np.uint8)
    offset = HEADER_SIZE
    for i in range(count):
        values[i] = np.frombuffer(data, dtype="<f4", count=length * channels, offset=offset).reshape(
            length, channels
        )
        offset += record - 1
        labels[i] = data[offset]
        offset += 1
    header = WindowFileHeader(
        channels=channels, length=length, count=count, label_set=label_set, version=version
    )
    return values, labels, header
