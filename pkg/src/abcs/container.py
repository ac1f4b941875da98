"""Binary container for a :class:`~abcs.sensing.MeasurementSet`.

Layout, all little-endian::

    magic        4s   b"ABCS"
    version      u16  1
    height       u32  cropped image height
    width        u32  cropped image width
    block        u16
    algorithm    u8   0 = zz, 1 = bbv, 2 = dd
    ratio        u32 numerator, u32 denominator
    threshold    f32  DD threshold T (0 for other algorithms)
    n_blocks     u32
    counts       u16 * n_blocks
    payload      f32 * sum(counts)       zigzag coefficients, block by block
    [bbv only]   u32 side count, f32 * side count

Coefficients are stored as 32-bit floats, so a set read back from disk equals
the in-memory set rounded to float32; writing it again reproduces the file
byte for byte.
"""

from __future__ import annotations

import struct
from fractions import Fraction
from pathlib import Path

import numpy as np

from .sensing import ALGORITHMS, MeasurementSet

MAGIC = b"ABCS"
VERSION = 1
_HEADER = struct.Struct("<4sHIIHBIIfI")


class ContainerError(ValueError):
    """Malformed or truncated measurement container."""


def dumps(ms: MeasurementSet) -> bytes:
    n_blocks = ms.grid.n_blocks
    if ms.block * ms.block > 0xFFFF:
        raise ContainerError(f"block size {ms.block} too large for u16 counts")
    parts = [
        _HEADER.pack(MAGIC, VERSION, ms.height, ms.width, ms.block, ALGORITHMS.index(ms.algorithm),
                     ms.ratio.numerator, ms.ratio.denominator, ms.threshold, n_blocks),
        ms.counts.astype("<u2").tobytes(),
        ms.payload.astype("<f4").tobytes(),
    ]
    if ms.algorithm == "bbv":
        parts.append(struct.pack("<I", ms.side.size))
        parts.append(ms.side.astype("<f4").tobytes())
    return b"".join(parts)


def loads(data: bytes) -> MeasurementSet:
    if len(data) < _HEADER.size:
        raise ContainerError("file too short for a container header")
    (magic, version, height, width, block, algo, num, den, threshold,
     n_blocks) = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ContainerError("bad magic; not a measurement container")
    if version != VERSION:
        raise ContainerError(f"unsupported container version {version}")
    if algo >= len(ALGORITHMS) or den == 0 or block < 2:
        raise ContainerError("corrupt header")
    if n_blocks != (height // block) * (width // block):
        raise ContainerError("block count does not match image geometry")

    pos = _HEADER.size

    def take(dtype, count):
        nonlocal pos
        size = np.dtype(dtype).itemsize * count
        if pos + size > len(data):
            raise ContainerError("truncated container")
        out = np.frombuffer(data, dtype=dtype, count=count, offset=pos)
        pos += size
        return out

    counts = take("<u2", n_blocks).astype(np.int64)
    if (counts > block * block).any():
        raise ContainerError("block count exceeds B^2")
    payload = take("<f4", int(counts.sum())).astype(np.float64)
    side = np.zeros(0)
    if ALGORITHMS[algo] == "bbv":
        (n_side,) = struct.unpack_from("<I", take("u1", 4).tobytes())
        side = take("<f4", n_side).astype(np.float64)
    if pos != len(data):
        raise ContainerError(f"{len(data) - pos} trailing bytes after payload")
    return MeasurementSet(height, width, block, ALGORITHMS[algo], Fraction(num, den), counts, payload,
                          threshold=float(threshold), side=side)


def write_measurements(path: str | Path, ms: MeasurementSet) -> None:
    Path(path).write_bytes(dumps(ms))


def read_measurements(path: str | Path) -> MeasurementSet:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise ContainerError(f"cannot read {path}: {exc}") from exc
    return loads(data)
