"""Iterative reconstruction and the role of damping.

The direct decode is the starting point. IDA alternates a denoiser with a
residual update whose memory term is z / D_F. Undamped (D_F = 1) the loop
oscillates; D_F = 2 settles above the direct decode. D-AMP with its
divergence-based memory term blows up at very low ratios.
"""

from pathlib import Path

import numpy as np

from abcs import DivergenceError, ReconConfig, SensingConfig, decode_idct, load_image, psnr, reconstruct, sense

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"
img = load_image(DATA / "cameraman256.pgm")
ms = sense(img, SensingConfig(0.1, "dd"))
print(f"direct decode: {psnr(img, decode_idct(ms)):.2f} dB")

# %% PSNR per iteration for two damping factors
for df in (1.0, 2.0):
    res = reconstruct(ms, ReconConfig("ida", 15, df), reference=img)
    print(f"IDA D_F={df:g}: " + " ".join(f"{r.psnr:.1f}" for r in res.trace))

# %% Final PSNR against D_F
for df in (1.5, 2.0, 3.0, 4.0):
    out = reconstruct(ms, ReconConfig("ida", 15, df)).image
    print(f"D_F={df:<4g} {psnr(img, out):.2f} dB")

# %% D-AMP at a very low ratio
low = sense(img, SensingConfig(0.04, "dd"))
try:
    reconstruct(low, ReconConfig("damp", 15))
except DivergenceError as exc:
    est = np.clip(exc.estimate, 0, 255)
    print(f"\nD-AMP at C_R=0.04: {exc}; last estimate {psnr(img, est):.2f} dB "
          f"vs direct {psnr(img, decode_idct(low)):.2f} dB")
