import numpy as np
import pytest

from segrefine import GridShape, LabelVolume, validate_prob


def random_prob(shape, classes, seed):
    """Random normalized probability volume (float32)."""
    rng = np.random.default_rng(seed)
    raw = rng.random((classes,) + tuple(shape))
    raw /= raw.sum(axis=0, keepdims=True)
    return validate_prob(raw.astype(np.float32))


def random_labels(shape, classes, seed):
    rng = np.random.default_rng(seed)
    vals = rng.integers(0, classes, size=shape, dtype=np.uint8)
    return LabelVolume(vals, classes, GridShape(shape))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
