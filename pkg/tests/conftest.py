import numpy as np
import pytest

from somqe.imaging.base import GrayImage

def image_of(rows):
    return GrayImage.from_array(np.array(rows, dtype=np.uint8))

@pytest.fixture
def rng():
    return np.random.default_rng(12345)

@pytest.fixture
def noise_image(rng):
    return GrayImage.from_array(rng.integers(0, 256, size=(37, 53), dtype=np.uint8))
