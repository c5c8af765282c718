"""Reader/writer for the CRV binary tensor container.

Layout (little-endian, bit-exact):

    bytes 0..3    magic ``b"CRV1"``
    bytes 4..15   three uint32 values: T, H, W
    bytes 16..    T*H*W float32 payload values, row-major within a frame,
                  frames in order

A file with Hbigger than 1 holds T grayscale frames of H x W pixels.  A file
with H == 1 encodes a generic multivariate series: T samples of W channels.
"""

import struct
from pathlib import Path

import numpy as np

from .errors import DecodeError

MAGIC = b"CRV1"
_HEADER = struct.Struct("<4sIII")


def write_crv(path, tensor) -> None:
    """Write a (T, H, W) array to ``path`` in the CRV container format.

    The payload is stored as little-endian float32; values are cast if the
    input has another dtype.  A 2-D (T, W) array is treated as H == 1.
    """
    arr = np.asarray(tensor)
    if arr.ndim == 2:
        arr = arr[:, None, :]
    if arr.ndim != 3:
        raise ValueError(f"expected a (T, H, W) or (T, W) array, got shape {arr.shape}")
    t, h, w = arr.shape
    if min(t, h, w) < 1:
        raise ValueError(f"all CRV dimensions must be >= 1, got {arr.shape}")
    payload = np.ascontiguousarray(arr, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, t, h, w))
        fh.write(payload.tobytes())


def read_crv(path) -> np.ndarray:
    """Read a CRV file and return its payload as a (T, H, W) float32 array."""
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise DecodeError(f"{path}: truncated CRV header")
        magic, t, h, w = _HEADER.unpack(header)
        if magic != MAGIC:
            raise DecodeError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
        if min(t, h, w) < 1:
            raise DecodeError(f"{path}: invalid dimensions T={t} H={h} W={w}")
        body = fh.read()
    expected = t * h * w * 4
    if len(body) != expected:
        raise DecodeError(
            f"{path}: payload holds {len(body)} bytes, expected {expected} "
            f"for T={t} H={h} W={w}"
        )
    flat = np.frombuffer(body, dtype="<f4")
    return flat.reshape(t, h, w)


def peek_crv_shape(path) -> tuple[int, int, int]:
    """Return (T, H, W) from a CRV header without loading the payload."""
    path = Path(path)
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
    if len(header) < _HEADER.size:
        raise DecodeError(f"{path}: truncated CRV header")
    magic, t, h, w = _HEADER.unpack(header)
    if magic != MAGIC:
        raise DecodeError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if min(t, h, w) < 1:
        raise DecodeError(f"{path}: invalid dimensions T={t} H={h} W={w}")
    return t, h, w


def is_crv_file(path) -> bool:
    """True if ``path`` is a regular file starting with the CRV magic."""
    path = Path(path)
    if not path.is_file():
        return False
    with open(path, "rb") as fh:
        return fh.read(4) == MAGIC
