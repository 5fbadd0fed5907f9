"""FSLB binary array format.

Layout: magic 'FSLB' (0x46 0x53 0x4C 0x42), u32 version = 1, u8 dtype
(1 = complex128), u8 ndim, ndim x u64 dims, little-endian row-major payload.
Writes are atomic (temp file + rename).
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

MAGIC = b"FSLB"
VERSION = 1
DTYPE_COMPLEX128 = 1

__all__ = ["write_fslb", "read_fslb", "FslbFormatError"]


class FslbFormatError(ValueError):
    pass


def write_fslb(path, array) -> None:
    arr = np.ascontiguousarray(np.asarray(array, dtype=np.complex128))
    header = MAGIC + struct.pack("<IBB", VERSION, DTYPE_COMPLEX128, arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    payload = arr.astype("<c16", copy=False).tobytes(order="C")
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".fslb.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(header)
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_fslb(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise FslbFormatError("not an FSLB file (bad magic)")
        version, dtype, ndim = struct.unpack("<IBB", fh.read(6))
        if version != VERSION:
            raise FslbFormatError(f"unsupported FSLB version {version}")
        if dtype != DTYPE_COMPLEX128:
            raise FslbFormatError(f"unsupported dtype code {dtype}")
        dims = struct.unpack(f"<{ndim}Q", fh.read(8 * ndim))
        count = 1
        for d in dims:
            count *= d
        payload = fh.read(16 * count)
        if len(payload) != 16 * count:
            raise FslbFormatError("truncated FSLB payload")
        arr = np.frombuffer(payload, dtype="<c16").reshape(dims)
    return arr.astype(np.complex128)
