import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make `oracles` importable

from urbanscape.backends import make_stub_suite


@pytest.fixture
def rng():
    return np.random.default_rng(20240117)


@pytest.fixture
def suite():
    return make_stub_suite(grid=2)


@pytest.fixture
def street_image(rng):
    """A 64x64 'street scene' with smooth structure (not pure noise)."""
    yy, xx = np.mgrid[0:64, 0:64]
    image = np.stack(
        [
            (xx * 3) % 256,
            (yy * 2 + 40) % 256,
            ((xx + yy) * 2) % 256,
        ],
        axis=-1,
    ).astype(np.uint8)
    return image


def random_mask(rng, height, width, density=0.5):
    return rng.random((height, width)) < density
