"""Readers for the two supported on-disk benchmark formats.

IDX (the MNIST distribution format, optionally gzipped) and the 32x32
MATLAB container used by the house-numbers dataset. Both return pools with
pixel intensities scaled to [0, 1].
"""

from __future__ import annotations

import gzip
import struct
from pathlib import Path

import numpy as np

from ltmx.data.types import IMAGE, LabeledSource
from ltmx.errors import DataError

_IDX_IMAGES_MAGIC = 0x00000803
_IDX_LABELS_MAGIC = 0x00000801


def _read_bytes(path: Path) -> bytes:
    raw = path.read_bytes()
    if path.suffix == ".gz" or raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def load_idx_source(images_path: str | Path, labels_path: str | Path, name: str = "mnist") -> LabeledSource:
    images_raw = _read_bytes(Path(images_path))
    magic, n, rows, cols = struct.unpack(">IIII", images_raw[:16])
    if magic != _IDX_IMAGES_MAGIC:
        raise DataError(f"{images_path}: bad IDX image magic 0x{magic:08x}")
    images = np.frombuffer(images_raw, dtype=np.uint8, offset=16)
    if images.size != n * rows * cols:
        raise DataError(f"{images_path}: truncated image payload")
    images = images.reshape(n, rows, cols, 1).astype(np.float32) / 255.0

    labels_raw = _read_bytes(Path(labels_path))
    magic, n_labels = struct.unpack(">II", labels_raw[:8])
    if magic != _IDX_LABELS_MAGIC:
        raise DataError(f"{labels_path}: bad IDX label magic 0x{magic:08x}")
    labels = np.frombuffer(labels_raw, dtype=np.uint8, offset=8).astype(np.int64)
    if len(labels) != n_labels or n_labels != n:
        raise DataError(f"{labels_path}: label count {n_labels} does not match {n} images")
    return LabeledSource(name=name, data=images, labels=labels, kind=IMAGE)


def load_svhn_mat(path: str | Path, name: str = "svhn") -> LabeledSource:
    from scipy.io import loadmat

    payload = loadmat(str(path))
    if "X" not in payload or "y" not in payload:
        raise DataError(f"{path}: expected variables 'X' and 'y'")
    images = np.transpose(payload["X"], (3, 0, 1, 2)).astype(np.float32) / 255.0
    labels = payload["y"].reshape(-1).astype(np.int64)
    labels[labels == 10] = 0   # the distribution stores digit 0 as class 10
    return LabeledSource(name=name, data=images, labels=labels, kind=IMAGE)
