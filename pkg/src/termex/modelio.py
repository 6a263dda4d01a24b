"""Low-level binary helpers for the versioned model file formats."""

from __future__ import annotations

import struct
from typing import BinaryIO

import numpy as np

from .errors import ModelFormatError


def _read_exact(fh: BinaryIO, size: int) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise ModelFormatError("truncated model file")
    return data


def write_header(fh: BinaryIO, magic: bytes, version: int) -> None:
    fh.write(magic)
    fh.write(struct.pack("<I", version))


def read_header(fh: BinaryIO, magic: bytes, version: int) -> None:
    got = _read_exact(fh, len(magic))
    if got != magic:
        raise ModelFormatError(f"bad magic {got!r}, expected {magic!r}")
    (got_version,) = struct.unpack("<I", _read_exact(fh, 4))
    if got_version != version:
        raise ModelFormatError(f"unsupported version {got_version}, expected {version}")


def write_u32(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<I", value))


def read_u32(fh: BinaryIO) -> int:
    return struct.unpack("<I", _read_exact(fh, 4))[0]


def write_u64(fh: BinaryIO, value: int) -> None:
    fh.write(struct.pack("<Q", value))


def read_u64(fh: BinaryIO) -> int:
    return struct.unpack("<Q", _read_exact(fh, 8))[0]


def write_f64(fh: BinaryIO, value: float) -> None:
    fh.write(struct.pack("<d", value))


def read_f64(fh: BinaryIO) -> float:
    return struct.unpack("<d", _read_exact(fh, 8))[0]


def write_str(fh: BinaryIO, value: str) -> None:
    data = value.encode("utf-8")
    write_u32(fh, len(data))
    fh.write(data)


def read_str(fh: BinaryIO) -> str:
    size = read_u32(fh)
    return _read_exact(fh, size).decode("utf-8")


def write_matrix(fh: BinaryIO, arr: np.ndarray) -> None:
    """Row-major float64 payload; the shape is owned by the caller's header."""
    fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_matrix(fh: BinaryIO, shape: tuple[int, ...]) -> np.ndarray:
    count = int(np.prod(shape)) if shape else 1
    data = _read_exact(fh, count * 8)
    arr = np.frombuffer(data, dtype="<f8").reshape(shape).copy()
    if not np.isfinite(arr).all():
        raise ModelFormatError("model matrix contains non-finite values")
    return arr
