"""Decoders for block DCT measurements.

``decode_idct`` is the real-time path: scatter each block's zigzag prefix and
invert the block DCT. The iterative decoders (ISTA, AMP, D-AMP, DAMP-D and IDA)
refine an image-domain estimate ``x`` with the loop

    r      = x + A* z
    x_new  = D(r)                       (soft threshold or a denoiser)
    z_new  = y - A x_new + alpha * z

and differ only in the denoiser and in the coefficient ``alpha`` of the
Onsager-style memory term:

=========  ===================================================
ISTA       0
AMP        mean(eta'(r)) / delta
DAMP       div D(r) / (delta * m)
DAMP_D     div D(r) / (delta * m * D_F)
IDA        1 / D_F
=========  ===================================================

with ``delta = m / n``. The noise level handed to the denoiser is
``sigma = ||z|| / sqrt(m)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .denoise import divergence, get_denoiser, soft_threshold
from .metrics import psnr
from .operators import SensingOperator
from .sensing import MeasurementSet

METHODS = ("idct", "ista", "amp", "damp", "dampd", "ida")
DENOISING_METHODS = ("damp", "dampd", "ida")
BLOWUP = 1e6


class DivergenceError(RuntimeError):
    """An iterate became non-finite or exceeded the magnitude guard."""

    def __init__(self, iteration: int, detail: str, estimate: np.ndarray | None = None):
        super().__init__(f"reconstruction diverged at iteration {iteration}: {detail}")
        self.iteration = iteration
        self.estimate = estimate


@dataclass
class ReconConfig:
    method: str = "ida"
    iterations: int = 15
    damping: float = 2.0
    denoiser: object = "dct"
    lam: float = 1.0
    seed: int = 42
    n_probes: int = 1
    init: str = "zero"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.damping < 1:
            raise ValueError("damping factor must be >= 1")
        if self.init not in ("zero", "direct"):
            raise ValueError("init must be 'zero' or 'direct'")
        if isinstance(self.denoiser, str):
            self.denoiser = get_denoiser(self.denoiser)


@dataclass
class ReconState:
    """Estimate ``x``, its residual ``z`` and the noise level ``||z||/sqrt(m)``."""

    x: np.ndarray
    z: np.ndarray
    sigma: float
    t: int = 0


def _sigma(z: np.ndarray) -> float:
    return float(np.linalg.norm(z)) / math.sqrt(z.size) if z.size else 0.0


def init_state(op: SensingOperator, y: np.ndarray, x0: np.ndarray | None = None) -> ReconState:
    x = np.zeros(op.grid.shape) if x0 is None else np.array(x0, dtype=np.float64)
    z = y - op.forward(x)
    return ReconState(x, z, _sigma(z), 0)


def _advance(state: ReconState, op: SensingOperator, y: np.ndarray,
             x_new: np.ndarray, alpha: float) -> ReconState:
    t = state.t + 1
    if not np.all(np.isfinite(x_new)):
        raise DivergenceError(t, "non-finite estimate", state.x)
    peak = float(np.max(np.abs(x_new)))
    if peak > BLOWUP:
        raise DivergenceError(t, f"|x| reached {peak:.3g}", state.x)
    z = y - op.forward(x_new) + alpha * state.z
    if not np.all(np.isfinite(z)):
        raise DivergenceError(t, "non-finite residual", x_new)
    return ReconState(x_new, z, _sigma(z), t)


def ista_step(state: ReconState, op: SensingOperator, y: np.ndarray, lam: float = 1.0) -> ReconState:
    """Iterative soft thresholding in the image domain at ``lam * sigma``."""
    r = state.x + op.adjoint(state.z)
    return _advance(state, op, y, soft_threshold(r, lam * state.sigma), 0.0)


def amp_step(state: ReconState, op: SensingOperator, y: np.ndarray, lam: float = 1.0) -> ReconState:
    """ISTA plus the AMP correction ``z * mean(eta'(r)) / delta``."""
    r = state.x + op.adjoint(state.z)
    tau = lam * state.sigma
    alpha = float(np.mean(np.abs(r) > tau)) / op.delta
    return _advance(state, op, y, soft_threshold(r, tau), alpha)


def onsager(variant: str, op: SensingOperator, div: float | None, damping: float) -> float:
    """Memory coefficient ``alpha`` for the denoising variants."""
    if variant == "ida":
        return 1.0 / damping
    alpha = div / (op.delta * op.m)
    if variant == "dampd":
        alpha /= damping
    elif variant != "damp":
        raise ValueError(f"unknown variant {variant!r}")
    return alpha


def damp_step(state: ReconState, op: SensingOperator, y: np.ndarray, denoiser,
              variant: str = "ida", damping: float = 2.0, seed: int = 0,
              n_probes: int = 1) -> ReconState:
    """One D-AMP / DAMP-D / IDA iteration.

    The divergence probe for iteration ``t`` is seeded with ``seed + t``.
    """
    r = state.x + op.adjoint(state.z)
    x_new = denoiser(r, state.sigma)
    div = None
    if variant != "ida":
        div = divergence(denoiser, r, state.sigma, seed=seed + state.t, n_probes=n_probes, base=x_new)
    return _advance(state, op, y, x_new, onsager(variant, op, div, damping))


def decode_idct(ms: MeasurementSet) -> np.ndarray:
    """Real-time decode: each block's zigzag prefix through the inverse block DCT."""
    return SensingOperator.from_measurements(ms).adjoint(ms.payload)


@dataclass
class TraceRow:
    iteration: int
    residual: float
    sigma: float
    psnr: float | None = None


@dataclass
class ReconResult:
    image: np.ndarray
    trace: list[TraceRow] = field(default_factory=list)


def _step(state, op, y, cfg: ReconConfig) -> ReconState:
    if cfg.method == "ista":
        return ista_step(state, op, y, cfg.lam)
    if cfg.method == "amp":
        return amp_step(state, op, y, cfg.lam)
    return damp_step(state, op, y, cfg.denoiser, cfg.method, cfg.damping, cfg.seed, cfg.n_probes)


def reconstruct(ms: MeasurementSet, cfg: ReconConfig | None = None,
                reference: np.ndarray | None = None) -> ReconResult:
    """Decode ``ms`` with the method in ``cfg``.

    Iterative methods start from ``x = 0`` (``cfg.init == "zero"``), so their
    first pseudo-data ``A* y`` is the direct decode, or from the direct decode
    itself (``"direct"``). The returned image is clamped to [0, 255] for
    iterative methods; the IDCT decode is returned as computed.

    With a ``reference`` image the trace carries PSNR per iteration. Row 0
    describes the direct decode; row ``t`` the estimate after ``t`` iterations.
    """
    cfg = cfg or ReconConfig()
    direct = decode_idct(ms)
    trace = []
    if cfg.method == "idct":
        if reference is not None:
            trace.append(TraceRow(0, 0.0, 0.0, psnr(reference, direct)))
        return ReconResult(direct, trace)

    op = SensingOperator.from_measurements(ms)
    y = ms.payload
    state = init_state(op, y, direct if cfg.init == "direct" else None)

    def record(st, img):
        if reference is not None:
            trace.append(TraceRow(st.t, float(np.linalg.norm(y - op.forward(st.x))), st.sigma,
                                  psnr(reference, img)))

    record(state, direct)
    for _ in range(cfg.iterations):
        state = _step(state, op, y, cfg)
        record(state, state.x)
    return ReconResult(np.clip(state.x, 0.0, 255.0), trace)


def write_trace(path: str | Path, trace: list[TraceRow]) -> None:
    """Write a per-iteration trace as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "residual_norm", "sigma", "psnr_db"])
        for row in trace:
            writer.writerow([row.iteration, f"{row.residual:.6g}", f"{row.sigma:.6g}",
                             "" if row.psnr is None else f"{row.psnr:.4f}"])
