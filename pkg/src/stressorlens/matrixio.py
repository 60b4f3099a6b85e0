"""A tiny binary container for dense float64 matrices.

Layout (all integers little-endian):

    bytes 0-3    magic b"SLMX"
    bytes 4-7    uint32 format version (currently 1)
    bytes 8-15   uint64 row count
    bytes 16-23  uint64 column count
    bytes 24-    rows * cols float64 values, row-major

The format exists so large dense artifacts (theta, TF-IDF) round-trip
bit-exactly between pipeline stages without JSON float noise.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import IntegrityError

MAGIC = b"SLMX"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    arr = np.ascontiguousarray(matrix, dtype="<f8")
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {arr.shape}")
    rows, cols = arr.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, rows, cols))
        fh.write(arr.tobytes(order="C"))


def read_matrix(path: str | Path) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise IntegrityError(f"{path}: truncated header")
        magic, version, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC:
            raise IntegrityError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise IntegrityError(f"{path}: unsupported version {version}")
        payload = fh.read()
    expected = rows * cols * 8
    if len(payload) != expected:
        raise IntegrityError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()
