"""Netpbm graymap (PGM) reading and writing, P2 (ascii) and P5 (binary)."""
import os

import numpy as np

from .errors import FormatError
from .image import as_image

__all__ = ["read_pgm", "write_pgm", "load_pgm", "save_pgm"]

_WHITESPACE = b" \t\r\n\v\f"


def _header_tokens(data, count):
    """Pull ``count`` whitespace separated tokens, skipping '#' comments.

    Returns the tokens and the offset just past the last token.
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in _WHITESPACE:
            pos += 1
        if pos >= n:
            raise FormatError("truncated PGM header")
        if data[pos] == ord("#"):
            while pos < n and data[pos] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def read_pgm(data):
    """Decode PGM bytes into a float64 image.

    >>> read_pgm(b"P2\\n2 2\\n255\\n0 255 128 64")
    array([[  0., 255.],
           [128.,  64.]])
    """
    data = bytes(data)
    tokens, pos = _header_tokens(data, 4)
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise FormatError(f"unsupported magic number {magic!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError("non-integer PGM header field") from None
    if width <= 0 or height <= 0:
        raise FormatError(f"invalid PGM size {width}x{height}")
    if not 0 < maxval <= 65535:
        raise FormatError(f"maxval {maxval} outside 1..65535")
    count = width * height

    if magic == b"P5":
        if pos >= len(data) or data[pos] not in _WHITESPACE:
            raise FormatError("missing whitespace after PGM header")
        raster = data[pos + 1:]
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        if len(raster) < count * dtype.itemsize:
            raise FormatError("truncated PGM raster")
        values = np.frombuffer(raster, dtype=dtype, count=count)
    else:
        # Comments are not allowed in the raster, so a plain split suffices.
        fields = data[pos:].split()
        if len(fields) < count:
            raise FormatError("truncated PGM raster")
        try:
            values = np.array([int(f) for f in fields[:count]])
        except ValueError:
            raise FormatError("non-integer sample in P2 raster") from None
    if np.any(values > maxval) or np.any(values < 0):
        raise FormatError("sample exceeds maxval")
    return values.reshape(height, width).astype(np.float64)


def write_pgm(img, mode="binary", maxval=255):
    """Encode an image as PGM bytes.

    Values are clamped to ``[0, maxval]`` and rounded half-to-even before
    encoding.  ``mode`` is ``"binary"`` (P5) or ``"ascii"`` (P2).
    """
    img = as_image(img)
    if not 0 < maxval <= 65535:
        raise ValueError("maxval must be in 1..65535")
    q = np.rint(np.clip(img, 0, maxval)).astype(np.int64)
    h, w = q.shape
    if mode == "binary":
        dtype = ">u2" if maxval > 255 else "u1"
        return b"P5\n%d %d\n%d\n" % (w, h, maxval) + q.astype(dtype).tobytes()
    if mode == "ascii":
        lines = [" ".join(str(v) for v in row) for row in q]
        return ("P2\n%d %d\n%d\n" % (w, h, maxval) + "\n".join(lines) + "\n").encode("ascii")
    raise ValueError(f"mode must be 'binary' or 'ascii', not {mode!r}")


def load_pgm(path):
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(path, img, mode="binary", maxval=255):
    data = write_pgm(img, mode=mode, maxval=maxval)
    with open(os.fspath(path), "wb") as fh:
        fh.write(data)
    return data
