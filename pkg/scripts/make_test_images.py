"""Regenerate the grayscale PGM fixtures in tests/data from scikit-image's bundled images.

Needs scikit-image; the generated files are committed so the test suite does not.
"""

from pathlib import Path

import numpy as np
from skimage import data
from skimage.color import rgb2gray

OUT = Path(__file__).resolve().parent.parent / "tests" / "data"


def gray(name):
    img = getattr(data, name)()
    if img.ndim == 3:
        img = rgb2gray(img[..., :3]) * 255.0
    return np.asarray(img, dtype=np.float64)


def center(img, size):
    h, w = img.shape
    top, left = (h - size) // 2, (w - size) // 2
    return img[top:top + size, left:left + size]


def halve(img):
    # 2x2 mean pooling
    h, w = img.shape
    return img[: h - h % 2, : w - w % 2].reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3))


def write_pgm(path, img):
    pixels = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    h, w = pixels.shape
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + pixels.tobytes())


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    images256 = {
        "cameraman": halve(gray("camera")),
        "moon": halve(gray("moon")),
        "astronaut": halve(gray("astronaut")),
        "coffee": center(gray("coffee"), 256),
        "coins": center(gray("coins"), 256),
        "chelsea": center(gray("chelsea"), 256),
        "brick": halve(gray("brick")),
    }
    for name, img in images256.items():
        img = center(img, 256) if img.shape != (256, 256) else img
        write_pgm(OUT / f"{name}256.pgm", img)
    write_pgm(OUT / "cameraman512.pgm", gray("camera"))
    write_pgm(OUT / "astronaut512.pgm", gray("astronaut"))


if __name__ == "__main__":
    main()
