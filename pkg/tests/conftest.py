"""Shared fixtures: test images and synthetic pyramid builders.

Quantitative table-reproduction tests need the classic Lena / Goldhill /
Barbara 512x512 8-bit images, which cannot be redistributed here.  Drop
them as lena.pgm / goldhill.pgm / barbara.pgm into tests/data (or point
MDWC_TEST_IMAGES at a directory holding them) and those tests will run;
otherwise they are skipped and the bundled scikit-image photographs stand
in for the property-style checks.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

from mdwc.pgm import read_pgm
from mdwc.transform import WaveletPyramid

DATA_DIR = Path(__file__).parent / "data"


def canonical_image(name):
    """lena/goldhill/barbara as uint8, or None when the file is absent."""
    for base in (os.environ.get("MDWC_TEST_IMAGES"), DATA_DIR):
        if not base:
            continue
        path = Path(base) / f"{name}.pgm"
        if path.exists():
            img = read_pgm(path)
            if img.shape != (512, 512):
                raise ValueError(f"{path}: expected 512x512")
            return img
    return None


def require_canonical(name):
    img = canonical_image(name)
    if img is None:
        pytest.skip(
            f"canonical {name}.pgm not available; place it in tests/data "
            "(see README) to enable this table-reproduction check"
        )
    return img


@pytest.fixture(scope="session")
def camera():
    from skimage import data

    return data.camera()


@pytest.fixture(scope="session")
def astro_gray():
    from skimage import data

    rgb = data.astronaut().astype(np.float64)
    gray = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.rint(gray), 0, 255).astype(np.uint8)


@pytest.fixture(scope="session")
def camera_small(camera):
    return np.ascontiguousarray(camera[128:256, 192:320])  # busy 128x128 crop


def sparse_pyramid(rng, height=16, width=16, levels=2, density=0.15, scale=200.0):
    """Random pyramid with spiky clustered coefficients, codec-stress shaped."""
    pyr = WaveletPyramid.zeros(height, width, levels)
    mask = rng.random((height, width)) < density
    spikes = rng.normal(0.0, scale, (height, width))
    noise = rng.normal(0.0, 0.4, (height, width))
    pyr.data[:] = np.where(mask, spikes, noise)
    return pyr


def random_weightsets(rng, scale=1.5):
    from mdwc.weights import WeightSet

    return {
        o: WeightSet.from_alphas(o, rng.normal(0.0, scale, 14))
        for o in ("HL", "LH", "HH")
    }


def zero_weightsets():
    from mdwc.weights import WeightSet

    return {o: WeightSet.zero(o) for o in ("HL", "LH", "HH")}
