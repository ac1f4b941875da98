"""Matrix-free block-diagonal sensing operator and its adjoint.

The forward map takes an image on the block grid to the stacked zigzag
prefixes of its block DCTs. Because the block DCT is orthonormal and the
selection keeps whole coefficients, the rows of the implied matrix are
orthonormal: ``forward(adjoint(y)) == y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pixelio import BlockGrid, partition, reassemble
from .sensing import MeasurementSet, prefix_mask
from .transform import dct2, from_zigzag, idct2, to_zigzag


@dataclass(frozen=True)
class SensingOperator:
    grid: BlockGrid
    counts: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        b2 = self.grid.block ** 2
        if counts.shape != (self.grid.n_blocks,) or (counts < 0).any() or (counts > b2).any():
            raise ValueError("counts must give one value in [0, B^2] per block")
        object.__setattr__(self, "counts", counts)
        mask = prefix_mask(counts, self.grid.block)
        mask.setflags(write=False)
        object.__setattr__(self, "_mask", mask)

    @classmethod
    def from_measurements(cls, ms: MeasurementSet) -> "SensingOperator":
        return cls(ms.grid, ms.counts)

    @property
    def m(self) -> int:
        return int(self.counts.sum())

    @property
    def n(self) -> int:
        return self.grid.n_pixels

    @property
    def shape(self) -> tuple[int, int]:
        return self.m, self.n

    @property
    def delta(self) -> float:
        """Sampling ratio ``M/N``."""
        return self.m / self.n

    def forward(self, x: np.ndarray) -> np.ndarray:
        """``A x``: block DCT then each block's zigzag prefix, blocks in row-major order."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.grid.shape:
            raise ValueError(f"expected an image of shape {self.grid.shape}, got {x.shape}")
        _, blocks = partition(x, self.grid.block)
        return to_zigzag(dct2(blocks))[self._mask]

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        """``A* y``: scatter into zero coefficient blocks, inverse DCT, reassemble."""
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.m,):
            raise ValueError(f"expected {self.m} measurements, got shape {y.shape}")
        b = self.grid.block
        zz = np.zeros((self.grid.n_blocks, b * b))
        zz[self._mask] = y
        return reassemble(self.grid, idct2(from_zigzag(zz, b)))
