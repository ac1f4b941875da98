"""Oracle baselines: what the best possible coefficient selection would give.

THB keeps the m largest coefficients of every block and THI the M largest in
the whole image. Both need the full transform, so they only bound what a
sensing scheme could reach with the same number of coefficients.
"""

from pathlib import Path

from abcs import SensingConfig, decode_idct, load_image, psnr, sense, thb, thi

DATA = Path(__file__).resolve().parents[1] / "tests" / "data"

print("image          C_R    zz      dd      THB     THI")
for name in ("cameraman256", "brick256", "moon256"):
    img = load_image(DATA / f"{name}.pgm")
    for cr in (0.04, 0.1, 0.2):
        cfg = SensingConfig(cr)
        zz = psnr(img, decode_idct(sense(img, cfg)))
        dd = psnr(img, decode_idct(sense(img, SensingConfig(cr, "dd"))))
        print(f"{name:14s} {cr:4.2f}  {zz:6.2f}  {dd:6.2f}  {psnr(img, thb(img, cfg)):6.2f}  "
              f"{psnr(img, thi(img, cfg)):6.2f}")
