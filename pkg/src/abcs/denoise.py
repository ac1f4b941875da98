"""Denoisers ``D_sigma`` for the iterative decoders, and a Monte-Carlo divergence.

A denoiser is any callable ``den(x, sigma) -> array`` that returns an array of
the same shape as ``x``. Three classical ones ship here; :func:`get_denoiser`
builds them by name so the CLI and config files can select them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .transform import dct2, idct2


@dataclass(frozen=True)
class Identity:
    name = "identity"

    def __call__(self, x: np.ndarray, sigma: float) -> np.ndarray:
        return np.array(x, dtype=np.float64)


@dataclass(frozen=True)
class GaussianBlur:
    """Separable Gaussian smoothing whose width grows with the noise level.

    The kernel standard deviation is ``scale * sigma / 25`` pixels, capped at
    ``max_width``; ``sigma == 0`` leaves the input untouched.
    """

    scale: float = 1.0
    max_width: float = 4.0
    name = "blur"

    def __call__(self, x: np.ndarray, sigma: float) -> np.ndarray:
        width = min(self.scale * sigma / 25.0, self.max_width)
        x = np.asarray(x, dtype=np.float64)
        if width <= 0:
            return x.copy()
        return ndimage.gaussian_filter(x, width, mode="reflect")


def soft_threshold(v: np.ndarray, tau: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


@dataclass(frozen=True)
class DctThreshold:
    """Shift-averaged block-DCT thresholding.

    The field is tiled with ``block x block`` DCT blocks at every offset on a
    ``step``-pixel lattice; in each tiling the AC coefficients are
    soft-thresholded (hard-thresholded with ``hard=True``) at ``k * sigma``
    and the results are averaged. Averaging over shifts removes the tiling
    artefacts a single fixed grid would add. Borders are handled by
    symmetric padding.

    The default ``k`` is low because the decoders pass ``||z|| / sqrt(m)``
    as ``sigma``; with orthonormal measurement rows the per-pixel error of
    the pseudo-data is smaller than that by a factor ``sqrt(m / n)``.
    """

    k: float = 0.75
    block: int = 4
    step: int = 1
    hard: bool = False
    name = "dct"

    def __call__(self, x: np.ndarray, sigma: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        b = self.block
        tau = self.k * sigma
        if tau <= 0:
            return x.copy()
        h, w = x.shape
        padded = np.pad(x, ((b, b + (-h % b)), (b, b + (-w % b))), mode="symmetric")
        ph, pw = h + b + (-h % b), w + b + (-w % b)
        acc = np.zeros_like(x)
        shifts = range(0, b, self.step)
        for dy in shifts:
            for dx in shifts:
                win = padded[dy:dy + ph, dx:dx + pw]
                tiles = win.reshape(ph // b, b, pw // b, b).swapaxes(1, 2)
                coeffs = dct2(tiles)
                dc = coeffs[..., 0, 0].copy()
                if self.hard:
                    coeffs = np.where(np.abs(coeffs) > tau, coeffs, 0.0)
                else:
                    coeffs = soft_threshold(coeffs, tau)
                coeffs[..., 0, 0] = dc
                out = idct2(coeffs).swapaxes(1, 2).reshape(ph, pw)
                acc += out[b - dy:b - dy + h, b - dx:b - dx + w]
        return acc / len(shifts) ** 2


DENOISERS = {"identity": Identity, "blur": GaussianBlur, "dct": DctThreshold}


def get_denoiser(name: str, **params):
    """Build a shipped denoiser from its name and keyword parameters."""
    try:
        cls = DENOISERS[name]
    except KeyError:
        raise ValueError(f"unknown denoiser {name!r}; choose from {sorted(DENOISERS)}") from None
    return cls(**params)


def probe_epsilon(x: np.ndarray) -> float:
    return float(np.max(np.abs(x))) * 1e-3 + 1e-6


def divergence(den, x: np.ndarray, sigma: float, epsilon: float | None = None,
               seed: int = 0, n_probes: int = 1, base: np.ndarray | None = None) -> float:
    """Monte-Carlo estimate of ``sum_i dD(x)_i / dx_i``.

    Uses ``n_probes`` Rademacher probes ``b`` and the forward difference
    ``<b, D(x + eps b) - D(x)> / eps``. ``base`` may carry a precomputed
    ``D(x)``. The result depends only on the arguments, so a fixed ``seed``
    makes it reproducible.
    """
    x = np.asarray(x, dtype=np.float64)
    if epsilon is None:
        epsilon = probe_epsilon(x)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if base is None:
        base = den(x, sigma)
    rng = np.random.default_rng(seed)
    total = 0.0
    for _ in range(n_probes):
        b = rng.integers(0, 2, size=x.shape) * 2.0 - 1.0
        total += float(np.vdot(b, den(x + epsilon * b, sigma) - base)) / epsilon
    return total / n_probes
