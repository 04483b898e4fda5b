"""Shared fixtures: an independent NIfTI-1 fixture writer and tiny helpers.

The fixture writer builds headers with struct.pack, deliberately sharing no
code with the production parser/writer so the two act as independent routes
in round-trip and endianness tests.
"""

import gzip
import struct

import numpy as np
import pytest

FIXTURE_DTYPE_CODES = {
    np.dtype(np.uint8): (2, 8),
    np.dtype(np.int16): (4, 16),
    np.dtype(np.float32): (16, 32),
}


def make_nifti_bytes(
    data: np.ndarray,
    *,
    big_endian: bool = False,
    spacing=(1.0, 1.0, 1.0),
    scl_slope: float = 0.0,
    scl_inter: float = 0.0,
    vox_offset: int = 352,
    magic: bytes = b"n+1\x00",
    datatype_code: int | None = None,
    bitpix: int | None = None,
    sizeof_hdr: int = 348,
    compress: bool = False,
) -> bytes:
    """Serialize an array as a NIfTI-1 single-file stream via struct.pack."""
    bo = ">" if big_endian else "<"
    code, bits = FIXTURE_DTYPE_CODES[np.dtype(data.dtype).newbyteorder("=")]
    hdr = bytearray(348)
    struct.pack_into(bo + "i", hdr, 0, sizeof_hdr)
    dims = [data.ndim] + list(data.shape) + [1] * (7 - data.ndim)
    struct.pack_into(bo + "8h", hdr, 40, *dims)
    struct.pack_into(bo + "h", hdr, 70, code if datatype_code is None else datatype_code)
    struct.pack_into(bo + "h", hdr, 72, bits if bitpix is None else bitpix)
    pix = [1.0] + list(spacing) + [1.0] * (7 - len(spacing))
    struct.pack_into(bo + "8f", hdr, 76, *pix)
    struct.pack_into(bo + "f", hdr, 108, float(vox_offset))
    struct.pack_into(bo + "f", hdr, 112, scl_slope)
    struct.pack_into(bo + "f", hdr, 116, scl_inter)
    hdr[344:348] = magic
    body = data.astype(data.dtype.newbyteorder(bo)).tobytes(order="F")
    stream = bytes(hdr) + b"\x00" * (vox_offset - 348) + body
    return gzip.compress(stream, mtime=0) if compress else stream


@pytest.fixture
def rng():
    return np.random.default_rng(20240901)


def random_array(rng, shape, dtype) -> np.ndarray:
    dtype = np.dtype(dtype)
    if dtype == np.uint8:
        return rng.integers(0, 256, size=shape).astype(np.uint8)
    if dtype == np.int16:
        return rng.integers(-30000, 30001, size=shape).astype(np.int16)
    return rng.normal(0.0, 100.0, size=shape).astype(np.float32)
