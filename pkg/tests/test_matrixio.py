"""Binary matrix container: byte-level layout and corruption detection."""

import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from stressorlens.errors import IntegrityError
from stressorlens.matrixio import read_matrix, write_matrix


def test_byte_layout_is_headered_little_endian_row_major(tmp_path):
    path = tmp_path / "m.slmx"
    write_matrix(path, np.array([[1.5, -2.0], [0.0, 3.25]]))
    blob = path.read_bytes()
    magic, version, rows, cols = struct.unpack("<4sIQQ", blob[:24])
    assert magic == b"SLMX"
    assert version == 1
    assert (rows, cols) == (2, 2)
    values = struct.unpack("<4d", blob[24:])
    assert values == (1.5, -2.0, 0.0, 3.25)
    assert len(blob) == 24 + 4 * 8


def test_round_trip_preserves_values_exactly(tmp_path):
    path = tmp_path / "m.slmx"
    mat = np.array([[1e-300, 1e300, np.pi]])
    write_matrix(path, mat)
    back = read_matrix(path)
    np.testing.assert_array_equal(back, mat)
    assert back.dtype == np.float64


def test_non_contiguous_input_is_stored_row_major(tmp_path):
    path = tmp_path / "m.slmx"
    mat = np.arange(6, dtype=np.float64).reshape(2, 3).T  # transposed view
    write_matrix(path, mat)
    np.testing.assert_array_equal(read_matrix(path), mat)


def test_wrong_magic_rejected(tmp_path):
    path = tmp_path / "m.slmx"
    path.write_bytes(b"XXXX" + b"\x00" * 20)
    with pytest.raises(IntegrityError):
        read_matrix(path)


def test_unsupported_version_rejected(tmp_path):
    path = tmp_path / "m.slmx"
    path.write_bytes(struct.pack("<4sIQQ", b"SLMX", 9, 1, 1) + struct.pack("<d", 1.0))
    with pytest.raises(IntegrityError):
        read_matrix(path)


def test_truncated_header_rejected(tmp_path):
    path = tmp_path / "m.slmx"
    path.write_bytes(b"SLMX\x01")
    with pytest.raises(IntegrityError):
        read_matrix(path)


def test_truncated_payload_rejected(tmp_path):
    path = tmp_path / "m.slmx"
    write_matrix(path, np.ones((3, 3)))
    blob = path.read_bytes()
    path.write_bytes(blob[:-8])
    with pytest.raises(IntegrityError):
        read_matrix(path)


def test_trailing_garbage_rejected(tmp_path):
    path = tmp_path / "m.slmx"
    write_matrix(path, np.ones((1, 1)))
    path.write_bytes(path.read_bytes() + b"\x00" * 8)
    with pytest.raises(IntegrityError):
        read_matrix(path)


@settings(max_examples=40, deadline=None)
@given(
    mat=hnp.arrays(
        dtype=np.float64,
        shape=hnp.array_shapes(min_dims=2, max_dims=2, max_side=6),
        elements=st.floats(allow_nan=False, width=64),
    )
)
def test_round_trip_any_finite_matrix(tmp_path_factory, mat):
    path = tmp_path_factory.mktemp("mio") / "m.slmx"
    write_matrix(path, mat)
    np.testing.assert_array_equal(read_matrix(path), mat)
