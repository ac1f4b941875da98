from pathlib import Path

import numpy as np
import pytest

from abcs import load_image

DATA = Path(__file__).parent / "data"
STANDARD = ["astronaut256", "brick256", "cameraman256", "chelsea256", "coffee256", "coins256", "moon256"]


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def cameraman():
    return load_image(DATA / "cameraman256.pgm")


@pytest.fixture(scope="session")
def standard_images():
    return {name: load_image(DATA / f"{name}.pgm") for name in STANDARD}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def smooth_image(rng, shape=(64, 64)):
    """Random but image-like test field: smoothed noise stretched to [0, 255]."""
    from scipy import ndimage

    x = ndimage.gaussian_filter(rng.normal(size=shape), 3.0)
    x = (x - x.min()) / (np.ptp(x) + 1e-12)
    return np.rint(255 * x)


# one line per acceptance criterion, printed again in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
