"""Sensing an image with zigzag DCT prefixes and decoding it in one step.

Every block keeps the first m coefficients of its 2-D DCT in zigzag order.
Decoding is one inverse DCT per block, so it is fast enough for real time.
Run from the repository root: python demos/01_sensing_and_direct_decode.py
"""

import time
from pathlib import Path

from abcs import SensingConfig, decode_idct, load_image, psnr, sense, ssim

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"
img = load_image(DATA / "cameraman256.pgm")
print(f"image {img.shape}, {img.size} pixels")

# %% Quality against compression ratio
print("\n C_R    per block   PSNR dB   SSIM")
for cr in (0.01, 0.04, 0.1, 0.2, 0.5, 1.0):
    ms = sense(img, SensingConfig(cr, "zz", block=32))
    out = decode_idct(ms)
    print(f"{cr:5.2f}   {ms.counts.mean():8.1f}   {psnr(img, out):7.2f}   {ssim(img, out):.4f}")

# At C_R = 1 every block keeps all 1024 coefficients and the decode is exact.

# %% Decode time
big = load_image(DATA / "cameraman512.pgm")
ms = sense(big, SensingConfig(0.1, "zz"))
t0 = time.perf_counter()
for _ in range(20):
    decode_idct(ms)
print(f"\n512x512 direct decode: {(time.perf_counter() - t0) / 20 * 1e3:.2f} ms per image")
