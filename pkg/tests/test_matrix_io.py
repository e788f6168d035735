import os
import struct

import numpy as np
import pytest

from risnf import MatrixFormatError
from risnf.matrix_io import decode_matrix, encode_matrix, read_matrix, write_matrix


def test_roundtrip_bit_exact(tmp_path, rng):
    A = rng.standard_normal((5, 3)) + 1j * rng.standard_normal((5, 3))
    p = tmp_path / "a.rnfc"
    write_matrix(p, A, "correlation", kind=2)
    B, magic, kind = read_matrix(p, "correlation")
    assert magic == b"RNFC" and kind == 2
    assert np.array_equal(A, B)


def test_layout_by_hand():
    # header and first value decoded with struct, independently of the reader
    raw = encode_matrix(np.array([[1.5 - 2j, 0], [0, 3j]]), "impedance", kind=7)
    assert raw[:4] == b"RNFZ"
    assert struct.unpack_from("<IIB", raw, 4) == (2, 2, 7)
    assert struct.unpack_from("<dd", raw, 13) == (1.5, -2.0)
    assert len(raw) == 13 + 4 * 16


@pytest.mark.parametrize("magic", ["correlation", "impedance", "coupling", "schedule"])
def test_all_magics(magic):
    A, got, _ = decode_matrix(encode_matrix(np.eye(2), magic))
    assert np.array_equal(A, np.eye(2))


def test_empty_matrix():
    A, _, _ = decode_matrix(encode_matrix(np.zeros((0, 4)), "correlation"))
    assert A.shape == (0, 4)


def test_bad_magic():
    raw = bytearray(encode_matrix(np.eye(2), "correlation"))
    raw[:4] = b"XXXX"
    with pytest.raises(MatrixFormatError):
        decode_matrix(bytes(raw))


def test_unexpected_magic():
    with pytest.raises(MatrixFormatError):
        decode_matrix(encode_matrix(np.eye(2), "coupling"), "correlation")


@pytest.mark.parametrize("cut", [3, 12, 20, -1])
def test_truncated(cut):
    raw = encode_matrix(np.eye(3), "correlation")
    with pytest.raises(MatrixFormatError):
        decode_matrix(raw[:cut])


def test_trailing_bytes():
    with pytest.raises(MatrixFormatError):
        decode_matrix(encode_matrix(np.eye(2), "correlation") + b"\0")


def test_refuses_non_2d():
    with pytest.raises(MatrixFormatError):
        encode_matrix(np.ones(3), "correlation")
    with pytest.raises(MatrixFormatError):
        encode_matrix(np.ones((2, 2)), "nonsense")


def test_write_is_atomic_and_leaves_no_temp(tmp_path):
    p = tmp_path / "m.rnfm"
    write_matrix(p, np.eye(2), "coupling")
    write_matrix(p, 2 * np.eye(3), "coupling")
    assert read_matrix(p)[0].shape == (3, 3)
    assert os.listdir(tmp_path) == ["m.rnfm"]


def test_failed_write_keeps_old_file(tmp_path):
    p = tmp_path / "m.rnfc"
    write_matrix(p, np.eye(2), "correlation")
    with pytest.raises(MatrixFormatError):
        write_matrix(p, np.ones(4), "correlation")
    assert np.array_equal(read_matrix(p)[0], np.eye(2))
