import os
from pathlib import Path

import numpy as np
import pytest

from graykeep.image_core import load_image

DATA = Path(__file__).parent / "data"
# Extra test images (e.g. airplane.png, lake.png) can be supplied through this
# directory; files are matched by stem.
EXTRA = os.environ.get("GRAYKEEP_TEST_IMAGES")

STANDARD_IMAGES = ("lena", "airplane", "lake", "baboon")


def find_image(name):
    for folder in filter(None, (EXTRA, DATA)):
        for ext in (".png", ".ppm"):
            p = Path(folder) / f"{name}{ext}"
            if p.exists():
                return p
    return None


def standard_images():
    """{name: array} for the standard images that are present."""
    out = {}
    for name in STANDARD_IMAGES:
        p = find_image(name)
        if p is not None:
            out[name] = load_image(p)
    return out


@pytest.fixture(scope="session")
def lena():
    return load_image(DATA / "lena.png")


@pytest.fixture(scope="session")
def baboon():
    return load_image(DATA / "baboon.png")


def smooth_image(rng, rows=64, cols=64):
    """Random image with natural-ish local correlation."""
    base = rng.integers(10, 246, size=(1, 1, 3))
    steps = rng.integers(-6, 7, size=(rows, cols, 3))
    img = base + np.cumsum(steps, axis=0) // 4 + np.cumsum(steps, axis=1) // 6
    return np.clip(img, 0, 255).astype(np.uint8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


def record_criterion(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
