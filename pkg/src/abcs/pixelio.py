"""Grayscale image I/O and B x B block partitioning.

Images are plain 2-D ``float64`` numpy arrays holding intensities in
[0, 255]. Quantisation to 8 bits happens only when writing a file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ImageFormatError(ValueError):
    """Raised for unreadable, truncated or unsupported image files."""


@dataclass(frozen=True)
class BlockGrid:
    """Geometry of an image cropped to whole ``B x B`` blocks."""

    block: int
    rows: int
    cols: int

    @property
    def n_blocks(self) -> int:
        return self.rows * self.cols

    @property
    def shape(self) -> tuple[int, int]:
        """Pixel shape of the cropped region."""
        return self.rows * self.block, self.cols * self.block

    @property
    def n_pixels(self) -> int:
        return self.n_blocks * self.block * self.block

    @classmethod
    def for_image(cls, shape: tuple[int, int], block: int) -> "BlockGrid":
        h, w = shape
        if block < 2 or block > min(h, w):
            raise ValueError(f"block size {block} out of range for image {h}x{w}")
        return cls(block, h // block, w // block)


_PGM_HEADER = re.compile(rb"\AP5(?:\s+|#[^\n]*\n)+?(\d+)(?:\s+|#[^\n]*\n)+?(\d+)(?:\s+|#[^\n]*\n)+?(\d+)\s")


def _read_pgm(raw: bytes) -> np.ndarray:
    m = _PGM_HEADER.match(raw)
    if m is None:
        raise ImageFormatError("not a binary PGM (P5) file")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise ImageFormatError(f"unsupported PGM maxval {maxval} (need 255)")
    payload = raw[m.end():]
    if len(payload) < w * h:
        raise ImageFormatError(f"truncated PGM payload: {len(payload)} of {w * h} bytes")
    return np.frombuffer(payload, dtype=np.uint8, count=w * h).reshape(h, w)


def _read_png(path: Path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        if im.mode != "L":
            raise ImageFormatError(f"unsupported PNG mode {im.mode!r}; need 8-bit grayscale")
        return np.asarray(im, dtype=np.uint8)


def load_image(path: str | Path) -> np.ndarray:
    """Read an 8-bit grayscale PGM (P5) or PNG file as a float image."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ImageFormatError(f"cannot read {path}: {exc}") from exc
    if raw.startswith(b"P5"):
        pixels = _read_pgm(raw)
    elif raw.startswith(b"\x89PNG"):
        pixels = _read_png(path)
    else:
        raise ImageFormatError(f"{path}: unrecognised image format")
    return pixels.astype(np.float64)


def to_uint8(img: np.ndarray) -> np.ndarray:
    """Round and clamp a real-valued image to 8-bit."""
    return np.clip(np.rint(img), 0, 255).astype(np.uint8)


def save_image(path: str | Path, img: np.ndarray) -> None:
    """Write ``img`` as PGM, or PNG when the suffix is ``.png``."""
    path = Path(path)
    pixels = to_uint8(img)
    if path.suffix.lower() == ".png":
        from PIL import Image

        Image.fromarray(pixels, mode="L").save(path)
        return
    h, w = pixels.shape
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + pixels.tobytes())


def crop(img: np.ndarray, block: int) -> np.ndarray:
    """Drop trailing rows/columns so both dimensions are multiples of ``block``."""
    grid = BlockGrid.for_image(img.shape, block)
    h, w = grid.shape
    return img[:h, :w]


def partition(img: np.ndarray, block: int) -> tuple[BlockGrid, np.ndarray]:
    """Split ``img`` into row-major ``(n_B, B, B)`` blocks after cropping.

    Block ``r * cols + c`` holds pixels ``[rB, rB+B) x [cB, cB+B)``.
    """
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale image, got shape {img.shape}")
    grid = BlockGrid.for_image(img.shape, block)
    h, w = grid.shape
    blocks = (
        img[:h, :w]
        .reshape(grid.rows, block, grid.cols, block)
        .swapaxes(1, 2)
        .reshape(grid.n_blocks, block, block)
    )
    return grid, blocks


def reassemble(grid: BlockGrid, blocks: np.ndarray) -> np.ndarray:
    """Inverse of :func:`partition`."""
    blocks = np.asarray(blocks)
    b = grid.block
    if blocks.shape != (grid.n_blocks, b, b):
        raise ValueError(f"expected {grid.n_blocks} blocks of {b}x{b}, got array of shape {blocks.shape}")
    h, w = grid.shape
    return blocks.reshape(grid.rows, grid.cols, b, b).swapaxes(1, 2).reshape(h, w)
