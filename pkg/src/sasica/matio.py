"""Matrix and vector serialization.

Two formats are supported:

* CSV, one matrix row per line, ``.`` as decimal separator and 17
  significant digits so that every float64 round-trips exactly.
* A raw binary layout: the 8-byte magic ``SDMAT001``, then ``rows`` and
  ``cols`` as little-endian u32, then the row-major little-endian f64 data.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"SDMAT001"


class FormatError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        for row in M:
            fh.write(",".join(_fmt(v) for v in row))
            fh.write("\n")


def read_csv(path) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([float(v) for v in line.split(",")])
    if not rows:
        raise FormatError(f"{path}: empty matrix file")
    if len({len(r) for r in rows}) != 1:
        raise FormatError(f"{path}: ragged rows")
    return np.array(rows, dtype=np.float64)


def to_bytes(M) -> bytes:
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    rows, cols = M.shape
    return MAGIC + struct.pack("<II", rows, cols) + M.astype("<f8").tobytes(order="C")


def from_bytes(buf: bytes) -> np.ndarray:
    if len(buf) < 16 or buf[:8] != MAGIC:
        raise FormatError("bad magic")
    rows, cols = struct.unpack("<II", buf[8:16])
    expected = 16 + 8 * rows * cols
    if len(buf) != expected:
        raise FormatError(f"expected {expected} bytes, got {len(buf)}")
    return np.frombuffer(buf, dtype="<f8", offset=16).reshape(rows, cols).astype(np.float64)


def write_binary(path, M) -> None:
    Path(path).write_bytes(to_bytes(M))


def read_binary(path) -> np.ndarray:
    return from_bytes(Path(path).read_bytes())


def write_matrix(path, M) -> None:
    """Dispatch on suffix: ``.csv`` for text, anything else binary."""
    if str(path).endswith(".csv"):
        write_csv(path, M)
    else:
        write_binary(path, M)


def read_matrix(path) -> np.ndarray:
    if str(path).endswith(".csv"):
        return read_csv(path)
    return read_binary(path)
