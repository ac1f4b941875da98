"""Orthonormal 2-D DCT-II on square blocks and the JPEG zigzag scan."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import fft

# reported by the bench harness
BACKEND = "scipy.fft.dctn (fast, orthonormal)"


def dct2(blocks: np.ndarray) -> np.ndarray:
    """Orthonormal DCT-II over the last two axes.

    Accepts a single ``(B, B)`` block or a stack ``(..., B, B)``.
    """
    blocks = np.asarray(blocks, dtype=np.float64)
    if blocks.ndim < 2 or blocks.shape[-1] != blocks.shape[-2]:
        raise ValueError(f"expected square blocks, got shape {blocks.shape}")
    return fft.dctn(blocks, type=2, norm="ortho", axes=(-2, -1))


def idct2(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`dct2`."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.ndim < 2 or coeffs.shape[-1] != coeffs.shape[-2]:
        raise ValueError(f"expected square coefficient blocks, got shape {coeffs.shape}")
    return fft.idctn(coeffs, type=2, norm="ortho", axes=(-2, -1))


@lru_cache(maxsize=None)
def zigzag_order(block: int) -> tuple[tuple[int, int], ...]:
    """JPEG zigzag scan of a ``block x block`` grid as ``(row, col)`` pairs.

    Anti-diagonal ``d = row + col`` is walked with rising row index when
    ``d`` is odd and falling row index when ``d`` is even, so the scan
    starts ``(0,0), (0,1), (1,0), (2,0), (1,1), (0,2), ...``.
    """
    if block < 1:
        raise ValueError("block size must be >= 1")
    order = []
    for d in range(2 * block - 1):
        lo, hi = max(0, d - block + 1), min(d, block - 1)
        rows = range(lo, hi + 1) if d % 2 else range(hi, lo - 1, -1)
        order.extend((r, d - r) for r in rows)
    return tuple(order)


@lru_cache(maxsize=None)
def zigzag_flat(block: int) -> np.ndarray:
    """Flat (row-major) indices of the zigzag scan; read-only."""
    idx = np.array([r * block + c for r, c in zigzag_order(block)], dtype=np.intp)
    idx.setflags(write=False)
    return idx


def to_zigzag(coeffs: np.ndarray) -> np.ndarray:
    """Reorder ``(..., B, B)`` coefficients into ``(..., B*B)`` zigzag vectors."""
    b = coeffs.shape[-1]
    return coeffs.reshape(*coeffs.shape[:-2], b * b)[..., zigzag_flat(b)]


def from_zigzag(vectors: np.ndarray, block: int) -> np.ndarray:
    """Inverse of :func:`to_zigzag`."""
    out = np.empty(vectors.shape[:-1] + (block * block,), dtype=np.float64)
    out[..., zigzag_flat(block)] = vectors
    return out.reshape(*vectors.shape[:-1], block, block)
