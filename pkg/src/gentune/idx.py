"""Reader/writer for the big-endian IDX tensor format.

Header layout: two zero bytes, a dtype code byte, a dimension-count byte,
then one big-endian uint32 per dimension, then the payload in row-major
order. Image files carry magic 0x00000803 (ubyte, 3 dims), label files
0x00000801 (ubyte, 1 dim).
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from .errors import (IdxBadMagicError, IdxDimensionOverflowError,
                     IdxTruncatedError)

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

# dtype code -> (numpy big-endian dtype, item size)
_DTYPES = {
    0x08: ">u1",
    0x09: ">i1",
    0x0B: ">i2",
    0x0C: ">i4",
    0x0D: ">f4",
    0x0E: ">f8",
}

_MAX_PAYLOAD_BYTES = 1 << 32


@dataclass(frozen=True)
class IdxTensor:
    magic: int
    dims: tuple
    data: np.ndarray

    @property
    def dtype_code(self) -> int:
        return (self.magic >> 8) & 0xFF


def load_idx(path) -> IdxTensor:
    """Parse an IDX file exactly; errors distinguish magic/length/size faults."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 4:
        raise IdxTruncatedError(f"{path}: shorter than an IDX header")
    (magic,) = struct.unpack(">I", raw[:4])
    zeros, dtype_code, ndim = (magic >> 16) & 0xFFFF, (magic >> 8) & 0xFF, magic & 0xFF
    if zeros != 0 or dtype_code not in _DTYPES or ndim == 0:
        raise IdxBadMagicError(f"{path}: magic 0x{magic:08x} is not an IDX tag")
    header_len = 4 + 4 * ndim
    if len(raw) < header_len:
        raise IdxTruncatedError(f"{path}: header cut off at {len(raw)} bytes")
    dims = struct.unpack(f">{ndim}I", raw[4:header_len])
    count = 1
    for d in dims:
        count *= d
    itemsize = np.dtype(_DTYPES[dtype_code]).itemsize
    if count * itemsize > _MAX_PAYLOAD_BYTES:
        raise IdxDimensionOverflowError(
            f"{path}: dims {dims} imply {count * itemsize} payload bytes")
    expected = header_len + count * itemsize
    if len(raw) != expected:
        raise IdxTruncatedError(
            f"{path}: payload is {len(raw) - header_len} bytes, expected "
            f"{count * itemsize}")
    data = np.frombuffer(raw, dtype=_DTYPES[dtype_code], offset=header_len,
                         count=count).reshape(dims)
    return IdxTensor(magic=magic, dims=dims, data=data)


def write_idx(path, tensor: IdxTensor) -> None:
    """Inverse of load_idx; write(parse(file)) is byte-identical."""
    dtype_code = tensor.dtype_code
    if dtype_code not in _DTYPES:
        raise IdxBadMagicError(f"cannot write dtype code 0x{dtype_code:02x}")
    data = np.ascontiguousarray(tensor.data, dtype=_DTYPES[dtype_code])
    with open(path, "wb") as f:
        f.write(struct.pack(">I", tensor.magic))
        f.write(struct.pack(f">{len(tensor.dims)}I", *tensor.dims))
        f.write(data.tobytes())


def images_to_float(tensor: IdxTensor) -> np.ndarray:
    """Flatten image payload to (n, rows*cols) float64 scaled to [0, 1]."""
    if tensor.magic != IMAGE_MAGIC:
        raise IdxBadMagicError(
            f"expected image magic 0x{IMAGE_MAGIC:08x}, got 0x{tensor.magic:08x}")
    n = tensor.dims[0]
    return tensor.data.reshape(n, -1).astype(np.float64) / 255.0


def labels_to_int(tensor: IdxTensor) -> np.ndarray:
    if tensor.magic != LABEL_MAGIC:
        raise IdxBadMagicError(
            f"expected label magic 0x{LABEL_MAGIC:08x}, got 0x{tensor.magic:08x}")
    return tensor.data.astype(np.int64)


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
