import os

import numpy as np
import pytest

from fslab.fslb_io import FslbFormatError, read_fslb, write_fslb


def test_roundtrip(tmp_path, rng):
    arr = rng.standard_normal((4, 8, 8)) + 1j * rng.standard_normal((4, 8, 8))
    path = tmp_path / "traj.fslb"
    write_fslb(path, arr)
    back = read_fslb(path)
    assert back.shape == arr.shape
    assert np.array_equal(back, arr.astype(np.complex128))


def test_header_layout(tmp_path):
    path = tmp_path / "one.fslb"
    write_fslb(path, np.array([[1.0 + 2.0j]]))
    raw = path.read_bytes()
    assert raw[:4] == b"FSLB"
    assert raw[4:8] == (1).to_bytes(4, "little")   # version
    assert raw[8] == 1                              # dtype complex128
    assert raw[9] == 2                              # ndim
    assert int.from_bytes(raw[10:18], "little") == 1
    assert int.from_bytes(raw[18:26], "little") == 1
    assert len(raw) == 26 + 16


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.fslb"
    path.write_bytes(b"NOPE" + bytes(32))
    with pytest.raises(FslbFormatError):
        read_fslb(path)


def test_truncated_payload(tmp_path):
    path = tmp_path / "trunc.fslb"
    write_fslb(path, np.ones((4, 4), complex))
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(FslbFormatError):
        read_fslb(path)


def test_no_temp_left_behind(tmp_path):
    path = tmp_path / "x.fslb"
    write_fslb(path, np.zeros(3, complex))
    leftovers = [f for f in os.listdir(tmp_path) if f.endswith(".tmp")]
    assert leftovers == []
