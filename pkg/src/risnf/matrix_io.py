"""Binary matrix files used for export and for the CLI cache.

Layout (little-endian): 4-byte magic, ``u32`` rows, ``u32`` cols, ``u8``
kind, then ``rows * cols`` complex128 values in row-major order, each stored
as ``(re, im)`` float64 pairs.

Magics: ``RNFC`` correlation, ``RNFZ`` impedance, ``RNFM`` coupling,
``RNFP`` phase schedule.
"""

import os
import struct
import tempfile

import numpy as np

from .errors import MatrixFormatError

MAGICS = {"correlation": b"RNFC", "impedance": b"RNFZ",
          "coupling": b"RNFM", "schedule": b"RNFP"}
_HEADER = struct.Struct("<4sIIB")


def encode_matrix(A, magic, kind=0):
    A = np.ascontiguousarray(np.asarray(A, dtype="<c16"))
    if A.ndim != 2:
        raise MatrixFormatError("only 2-D matrices can be written")
    magic = MAGICS.get(magic, magic)
    if magic not in MAGICS.values():
        raise MatrixFormatError(f"unknown magic {magic!r}")
    return _HEADER.pack(magic, A.shape[0], A.shape[1], int(kind)) + A.tobytes()


def decode_matrix(data, expect_magic=None):
    """Parse bytes into ``(matrix, magic, kind)``; validates magic and size."""
    if len(data) < _HEADER.size:
        raise MatrixFormatError("file shorter than the header")
    magic, rows, cols, kind = _HEADER.unpack_from(data)
    if magic not in MAGICS.values():
        raise MatrixFormatError(f"bad magic {magic!r}")
    if expect_magic is not None and magic != MAGICS.get(expect_magic, expect_magic):
        raise MatrixFormatError(f"expected magic {expect_magic!r}, found {magic!r}")
    body = len(data) - _HEADER.size
    if body != rows * cols * 16:
        raise MatrixFormatError(
            f"payload is {body} bytes, header implies {rows * cols * 16}")
    A = np.frombuffer(data, dtype="<c16", offset=_HEADER.size).reshape(rows, cols)
    return A.astype(complex), magic, kind


def write_matrix(path, A, magic, kind=0):
    """Write atomically (temp file + rename) so readers never see partial files."""
    payload = encode_matrix(A, magic, kind)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_matrix(path, expect_magic=None):
    with open(path, "rb") as fh:
        return decode_matrix(fh.read(), expect_magic)
