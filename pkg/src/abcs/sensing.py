"""Deterministic block DCT sensing: L-DCT-ZZ and the two adaptive allocators.

Every measurement of a block is one of its orthonormal 2-D DCT coefficients,
taken in zigzag order, so a block sensed with ``m`` measurements carries the
first ``m`` zigzag coefficients. The adaptive schemes only change how many
coefficients each block receives:

* ``zz``  - uniform split of the budget ``M = floor(C_R * N)``.
* ``bbv`` - budget left after a strided boundary-variation survey is split in
  proportion to each block's boundary variation.
* ``dd``  - half the budget is spent on a zigzag prefix of every block; the rest
  is split in proportion to how many of those coefficients exceed a threshold.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .pixelio import BlockGrid, crop, partition
from .transform import dct2, to_zigzag

ALGORITHMS = ("zz", "bbv", "dd")


class ConfigError(ValueError):
    """Invalid sensing configuration or an infeasible measurement budget."""


def as_ratio(value: float | str | Fraction) -> Fraction:
    """Exact rational form of a compression ratio such as ``0.1``."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        value = repr(value)
    return Fraction(value).limit_denominator(1_000_000)


@dataclass(frozen=True)
class SensingConfig:
    """Sensing parameters.

    ``ratio`` is the compression ratio ``C_R = M/N``; ``threshold`` overrides
    the tabulated DD threshold when given.
    """

    ratio: Fraction
    algorithm: str = "zz"
    block: int = 32
    threshold: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "ratio", as_ratio(self.ratio))
        if not 0 < self.ratio <= 1:
            raise ConfigError(f"compression ratio must lie in (0, 1], got {float(self.ratio)}")
        if self.block < 2:
            raise ConfigError(f"block size must be >= 2, got {self.block}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")

    @property
    def factor(self) -> Fraction:
        """Compression factor ``C_F = N/M``."""
        return 1 / self.ratio

    def budget(self, n_pixels: int) -> int:
        return math.floor(self.ratio * n_pixels)


@dataclass(frozen=True)
class AllocationPlan:
    """Per-block measurement counts.

    ``phase1`` and ``phase2`` count DCT coefficients; ``side_count`` counts
    measurements that are not DCT coefficients (the BBV pixel differences)
    but are still charged against the budget.
    """

    phase1: np.ndarray
    phase2: np.ndarray
    m_target: int
    side_count: int = 0

    @property
    def counts(self) -> np.ndarray:
        """Zigzag prefix length for each block."""
        return self.phase1 + self.phase2

    @property
    def m_actual(self) -> int:
        return int(self.counts.sum()) + self.side_count


@dataclass
class MeasurementSet:
    """Coefficients sensed from one image plus the header needed to decode them.

    ``payload`` is the concatenation, block by block in row-major block
    order, of each block's zigzag-prefix coefficients; ``counts[i]`` is the
    prefix length of block ``i``.
    """

    height: int
    width: int
    block: int
    algorithm: str
    ratio: Fraction
    counts: np.ndarray
    payload: np.ndarray
    threshold: float = 0.0
    side: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.payload = np.asarray(self.payload, dtype=np.float64)
        self.side = np.asarray(self.side, dtype=np.float64)
        if self.counts.shape != (self.grid.n_blocks,):
            raise ValueError(f"need {self.grid.n_blocks} block counts, got {self.counts.shape}")
        if self.payload.shape != (int(self.counts.sum()),):
            raise ValueError("payload length does not match the block counts")

    @property
    def grid(self) -> BlockGrid:
        return BlockGrid(self.block, self.height // self.block, self.width // self.block)

    @property
    def m_target(self) -> int:
        return math.floor(self.ratio * self.grid.n_pixels)

    @property
    def side_count(self) -> int:
        """Budget charged for non-coefficient measurements (BBV survey)."""
        if self.algorithm != "bbv":
            return 0
        stride, _, n_side = bbv_geometry(1 / self.ratio, self.block)
        return bbv_overhead(self.grid, stride, n_side)

    @property
    def m_actual(self) -> int:
        return int(self.counts.sum()) + self.side_count

    def block_payload(self, i: int) -> np.ndarray:
        start = int(self.counts[:i].sum())
        return self.payload[start:start + int(self.counts[i])]


def prefix_mask(counts: np.ndarray, block: int) -> np.ndarray:
    """Boolean ``(n_B, B*B)`` mask selecting each block's zigzag prefix."""
    return np.arange(block * block)[None, :] < np.asarray(counts)[:, None]


# -- integer allocation ---------------------------------------------------

def largest_remainder(weights: np.ndarray, budget: int) -> np.ndarray:
    """Split ``budget`` in proportion to ``weights`` into integers summing to it.

    Shares are floored and the leftover units go to the largest fractional
    parts, ties to the lower index. All-zero weights split uniformly.
    """
    weights = np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    if total <= 0:
        weights = np.ones_like(weights)
        total = weights.sum()
    exact = budget * weights / total
    share = np.floor(exact).astype(np.int64)
    leftover = budget - int(share.sum())
    if leftover > 0:
        order = np.argsort(-(exact - share), kind="stable")
        share[order[:leftover]] += 1
    return share


def capped_split(weights: np.ndarray, budget: int, caps: np.ndarray | int) -> np.ndarray:
    """Proportional integer split with a per-block ceiling.

    Whatever a capped block cannot take is split again, by the same rule,
    over the blocks that still have room, until nothing is left over or every
    block is full.
    """
    weights = np.asarray(weights, dtype=np.float64)
    caps = np.broadcast_to(np.asarray(caps, dtype=np.int64), weights.shape)
    alloc = np.zeros(weights.shape, dtype=np.int64)
    room = caps > 0
    remaining = int(budget)
    while remaining > 0 and room.any():
        share = np.zeros_like(alloc)
        share[room] = largest_remainder(weights[room], remaining)
        alloc += share
        remaining = int(np.maximum(alloc - caps, 0).sum())
        alloc = np.minimum(alloc, caps)
        room = alloc < caps
    return alloc


# -- L-DCT-ZZ -------------------------------------------------------------

def uniform_counts(m_total: int, n_blocks: int) -> np.ndarray:
    """``m_total // n_B`` per block, the remainder one each to the first blocks."""
    counts = np.full(n_blocks, m_total // n_blocks, dtype=np.int64)
    counts[: m_total % n_blocks] += 1
    return counts


def apply_plan(img: np.ndarray, plan: AllocationPlan, cfg: SensingConfig,
               side: np.ndarray | None = None, threshold: float = 0.0) -> MeasurementSet:
    """Sense each block's zigzag prefix of the length given by ``plan``."""
    grid, blocks = partition(img, cfg.block)
    counts = plan.counts
    if counts.shape != (grid.n_blocks,):
        raise ValueError(f"plan has {counts.size} blocks, image has {grid.n_blocks}")
    if (counts < 0).any() or (counts > cfg.block ** 2).any():
        raise ValueError("block counts must lie in [0, B^2]")
    coeffs = to_zigzag(dct2(blocks))
    payload = coeffs[prefix_mask(counts, cfg.block)]
    h, w = grid.shape
    return MeasurementSet(h, w, cfg.block, cfg.algorithm, cfg.ratio, counts.copy(), payload,
                          threshold=threshold, side=np.zeros(0) if side is None else side)


def sense_zz(img: np.ndarray, cfg: SensingConfig) -> MeasurementSet:
    """Non-adaptive sensing: the same zigzag prefix length in every block."""
    grid = BlockGrid.for_image(np.shape(img), cfg.block)
    m_total = cfg.budget(grid.n_pixels)
    if m_total < grid.n_blocks:
        warnings.warn(f"budget M={m_total} is below the block count {grid.n_blocks}; "
                      "some blocks get no measurements", stacklevel=2)
    counts = uniform_counts(m_total, grid.n_blocks)
    plan = AllocationPlan(np.zeros_like(counts), counts, m_total)
    return apply_plan(img, plan, replace(cfg, algorithm="zz"))


# -- AL-DCT-BBV -----------------------------------------------------------

@dataclass(frozen=True)
class BbvParams:
    """Boundary-variation survey of one image."""

    stride: int
    x0: int
    y0: int
    n_side: int
    variation: np.ndarray
    m_bbv: int
    samples: np.ndarray


def bbv_geometry(factor: Fraction, block: int) -> tuple[int, int, int]:
    """Sampling stride ``L``, offset ``X0 = Y0`` and samples per side ``n_S``."""
    stride = max(math.floor(factor), 1)
    return stride, stride // 2, block // stride


def bbv_overhead(grid: BlockGrid, stride: int, n_side: int) -> int:
    """Number of survey measurements charged to the budget.

    Two sides per block plus the bottom and right image edges; the edge term
    is rounded up.
    """
    if n_side == 0:
        return 0
    h, w = grid.shape
    return 2 * n_side * grid.n_blocks + -(-(h + w) // stride)


def _pairs(starts: np.ndarray, offsets: np.ndarray, limit: int) -> tuple[np.ndarray, np.ndarray]:
    # first pixel index of each adjacent pair; pairs running off the image step back by one
    a = starts[:, None] + offsets[None, :]
    a = np.where(a + 1 >= limit, a - 1, a)
    return a, a + 1


def bbv_measure(img: np.ndarray, cfg: SensingConfig) -> BbvParams:
    """Measure the strided boundary variation around every block.

    Each block samples ``n_S`` horizontal differences along its first row and
    ``n_S`` vertical differences down its first column. Its bottom and right
    sides reuse the first row/column samples of the blocks below and to the
    right; blocks on the bottom/right image edge sample their own last
    row/column instead.
    """
    grid, _ = partition(img, cfg.block)
    x = crop(np.asarray(img, dtype=np.float64), cfg.block)
    h, w = grid.shape
    b = cfg.block
    stride, x0, n_side = bbv_geometry(cfg.factor, b)
    if n_side == 0:
        return BbvParams(stride, x0, x0, 0, np.zeros(grid.n_blocks), 0, np.zeros(0))

    offsets = x0 + stride * np.arange(n_side)
    top_rows = np.arange(grid.rows) * b
    left_cols = np.arange(grid.cols) * b
    bottom_rows = np.minimum(top_rows + b, h - 1)
    right_cols = np.minimum(left_cols + b, w - 1)

    ca, cb = _pairs(left_cols, offsets, w)          # (cols, n_S)
    ra, rb = _pairs(top_rows, offsets, h)           # (rows, n_S)

    def horizontal(rows):
        # (rows, cols, n_S) differences along the given pixel rows
        return np.abs(x[rows[:, None, None], cb[None]] - x[rows[:, None, None], ca[None]])

    def vertical(cols):
        # (rows, cols, n_S) differences down the given pixel columns
        d = np.abs(x[rb[:, None, :], cols[None, :, None]] - x[ra[:, None, :], cols[None, :, None]])
        return d

    top, left = horizontal(top_rows), vertical(left_cols)
    bottom, right = horizontal(bottom_rows), vertical(right_cols)
    variation = (top.sum(-1) + left.sum(-1) + bottom.sum(-1) + right.sum(-1)).reshape(-1)

    samples = np.concatenate([
        np.concatenate([top, left], axis=-1).reshape(-1),
        bottom[-1].reshape(-1),
        right[:, -1].reshape(-1),
    ])
    return BbvParams(stride, x0, x0, n_side, variation, bbv_overhead(grid, stride, n_side), samples)


def allocate_bbv(variation: np.ndarray, m_total: int, m_bbv: int, block: int) -> AllocationPlan:
    """Split the coefficient budget ``m_total - m_bbv`` by boundary variation."""
    if m_total <= m_bbv:
        raise ConfigError(f"budget M={m_total} does not exceed the BBV survey cost {m_bbv}")
    variation = np.asarray(variation, dtype=np.float64)
    phase2 = capped_split(variation, m_total - m_bbv, block * block)
    return AllocationPlan(np.zeros_like(phase2), phase2, m_total, side_count=m_bbv)


def sense_bbv(img: np.ndarray, cfg: SensingConfig) -> MeasurementSet:
    """AL-DCT-BBV sensing; reverts to :func:`sense_zz` when it cannot adapt.

    That happens when the stride exceeds the block size (no survey samples)
    and at full rate, where every coefficient fits in the budget anyway.
    """
    grid = BlockGrid.for_image(np.shape(img), cfg.block)
    m_total = cfg.budget(grid.n_pixels)
    if m_total >= grid.n_pixels:
        return sense_zz(img, cfg)
    params = bbv_measure(img, cfg)
    if params.n_side == 0:
        warnings.warn(f"BBV stride {params.stride} exceeds block size {cfg.block}; "
                      "falling back to non-adaptive zigzag sensing", stacklevel=2)
        return sense_zz(img, cfg)
    plan = allocate_bbv(params.variation, m_total, params.m_bbv, cfg.block)
    return apply_plan(img, plan, cfg, side=params.samples)


# -- AL-DCT-DD ------------------------------------------------------------

_DD_TABLE = {
    # image height column -> (upper C_F bound for T=15, lower C_F bound for T=60)
    256: (Fraction(2), Fraction("3.33")),
    512: (Fraction(2), Fraction(10)),
}


def dd_threshold(height: int, factor: Fraction | float) -> float:
    """Tabulated DD significance threshold for an image height and ``C_F``.

    Heights below 384 use the 256-pixel column, the rest the 512 column.
    """
    factor = as_ratio(factor)
    low, high = _DD_TABLE[256 if height < 384 else 512]
    if factor <= low:
        return 15.0
    if factor >= high:
        return 60.0
    return 30.0


def dd_phase1_count(cfg: SensingConfig) -> int:
    """Phase-1 coefficients per block: half of the per-block share, floored."""
    return math.floor(Fraction(cfg.block * cfg.block) / (2 * cfg.factor))


def allocate_dd(significant: np.ndarray, phase1: int, budget: int, block: int) -> AllocationPlan:
    """Split ``budget`` phase-2 coefficients in proportion to the significant counts."""
    significant = np.asarray(significant)
    n_blocks = significant.size
    phase2 = capped_split(significant, budget, block * block - phase1)
    return AllocationPlan(np.full(n_blocks, phase1, dtype=np.int64), phase2,
                          n_blocks * phase1 + budget)


def sense_dd(img: np.ndarray, cfg: SensingConfig) -> MeasurementSet:
    """AL-DCT-DD sensing.

    Phase 1 takes ``floor(B^2 C_R / 2)`` zigzag coefficients from every block
    and counts those with magnitude above the threshold ``T``. Phase 2
    continues each zigzag prefix, sharing the remaining budget in proportion
    to those counts.
    """
    grid, blocks = partition(img, cfg.block)
    m_total = cfg.budget(grid.n_pixels)
    phase1 = dd_phase1_count(cfg)
    threshold = cfg.threshold if cfg.threshold is not None else dd_threshold(grid.shape[0], cfg.factor)
    coeffs = to_zigzag(dct2(blocks))
    significant = (np.abs(coeffs[:, :phase1]) > threshold).sum(axis=1)
    plan = allocate_dd(significant, phase1, m_total - grid.n_blocks * phase1, cfg.block)
    plan = replace(plan, m_target=m_total)
    return apply_plan(img, plan, cfg, threshold=threshold)


def sense(img: np.ndarray, cfg: SensingConfig) -> MeasurementSet:
    """Sense ``img`` with the algorithm named in ``cfg``."""
    return {"zz": sense_zz, "bbv": sense_bbv, "dd": sense_dd}[cfg.algorithm](img, cfg)
