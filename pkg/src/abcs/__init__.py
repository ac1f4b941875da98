"""Adaptive block compressive sensing with deterministic block-DCT dictionaries."""

from .denoise import DctThreshold, GaussianBlur, Identity, divergence, get_denoiser
from .metrics import QualityReport, psnr, quality, ssim, thb, thi
from .operators import SensingOperator
from .pixelio import BlockGrid, ImageFormatError, load_image, partition, reassemble, save_image
from .recon import DivergenceError, ReconConfig, decode_idct, reconstruct
from .sensing import (
    AllocationPlan,
    ConfigError,
    MeasurementSet,
    SensingConfig,
    allocate_bbv,
    allocate_dd,
    bbv_measure,
    sense,
    sense_bbv,
    sense_dd,
    sense_zz,
)
from .transform import dct2, idct2, zigzag_order

__version__ = "0.1.0"
