"""Image quality metrics and the full-sensing thresholding baselines."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .pixelio import crop, partition, reassemble
from .sensing import SensingConfig, uniform_counts
from .transform import dct2, from_zigzag, idct2, to_zigzag

PEAK = 255.0


def _pair(ref, test):
    ref = np.asarray(ref, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    if ref.shape != test.shape:
        raise ValueError(f"image shapes differ: {ref.shape} vs {test.shape}")
    return ref, test


def mse(ref: np.ndarray, test: np.ndarray) -> float:
    ref, test = _pair(ref, test)
    return float(np.mean((ref - test) ** 2))


def psnr(ref: np.ndarray, test: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for peak 255; ``inf`` for identical images."""
    err = mse(ref, test)
    if err == 0:
        return math.inf
    return 10.0 * math.log10(PEAK ** 2 / err)


def _gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    g = np.exp(-0.5 * ((np.arange(size) - size // 2) / sigma) ** 2)
    g /= g.sum()
    return np.outer(g, g)


def ssim(ref: np.ndarray, test: np.ndarray) -> float:
    """Mean SSIM over all full 11x11 Gaussian (sigma 1.5) windows.

    Constants K1 = 0.01, K2 = 0.03, dynamic range 255.
    """
    ref, test = _pair(ref, test)
    win = _gaussian_window()
    if min(ref.shape) < win.shape[0]:
        raise ValueError(f"SSIM needs images at least {win.shape[0]}x{win.shape[0]}")
    c1, c2 = (0.01 * PEAK) ** 2, (0.03 * PEAK) ** 2

    def filt(a):
        return fftconvolve(a, win, mode="valid")

    mu_x, mu_y = filt(ref), filt(test)
    sxx = filt(ref * ref) - mu_x ** 2
    syy = filt(test * test) - mu_y ** 2
    sxy = filt(ref * test) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * sxy + c2)
    den = (mu_x ** 2 + mu_y ** 2 + c1) * (sxx + syy + c2)
    return float(np.mean(num / den))


@dataclass(frozen=True)
class QualityReport:
    psnr_db: float
    ssim: float
    mse: float

    def __str__(self):
        return f"PSNR {self.psnr_db:.2f} dB  SSIM {self.ssim:.4f}  MSE {self.mse:.4g}"


def quality(ref: np.ndarray, test: np.ndarray) -> QualityReport:
    return QualityReport(psnr(ref, test), ssim(ref, test), mse(ref, test))


def _keep_and_decode(grid, coeffs: np.ndarray, keep: np.ndarray) -> np.ndarray:
    kept = np.where(keep, coeffs, 0.0)
    return reassemble(grid, idct2(from_zigzag(kept, grid.block)))


def thb(img: np.ndarray, cfg: SensingConfig) -> np.ndarray:
    """One threshold per block: each block keeps its ``m`` largest coefficients.

    ``m`` follows the same balanced split as uniform zigzag sensing. Equal
    magnitudes are broken in favour of the lower zigzag index.
    """
    grid, blocks = partition(img, cfg.block)
    coeffs = to_zigzag(dct2(blocks))
    counts = uniform_counts(cfg.budget(grid.n_pixels), grid.n_blocks)
    rank = np.empty(coeffs.shape, dtype=np.int64)
    order = np.argsort(-np.abs(coeffs), axis=1, kind="stable")
    np.put_along_axis(rank, order, np.arange(coeffs.shape[1])[None, :], axis=1)
    return _keep_and_decode(grid, coeffs, rank < counts[:, None])


def thi(img: np.ndarray, cfg: SensingConfig) -> np.ndarray:
    """One threshold for the whole image: keep the ``M`` largest coefficients anywhere.

    Ties go to the lower zigzag index, then the lower block index.
    """
    grid, blocks = partition(img, cfg.block)
    coeffs = to_zigzag(dct2(blocks))
    m_total = cfg.budget(grid.n_pixels)
    n_b, b2 = coeffs.shape
    block_idx, zz_idx = np.divmod(np.arange(n_b * b2), b2)
    order = np.lexsort((block_idx, zz_idx, -np.abs(coeffs).reshape(-1)))
    keep = np.zeros(n_b * b2, dtype=bool)
    keep[order[:m_total]] = True
    return _keep_and_decode(grid, coeffs, keep.reshape(n_b, b2))


def cropped_reference(img: np.ndarray, block: int) -> np.ndarray:
    """The region every decoder reconstructs: ``img`` cropped to whole blocks."""
    return crop(np.asarray(img, dtype=np.float64), block)
