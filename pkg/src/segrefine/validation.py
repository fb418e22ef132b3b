"""Input coercion helpers shared by the estimator API and the CLI."""

from __future__ import annotations

import numpy as np

from .errors import BadRankError, OutOfRangeError
from .grid import GridShape, LabelVolume, ProbVolume, validate_prob


def as_prob_volume(X, tolerance: float = 1e-4) -> ProbVolume:
    """Accept a ProbVolume or a raw (classes, *spatial) array."""
    if isinstance(X, ProbVolume):
        return X
    return validate_prob(np.asarray(X), tolerance=tolerance)


def as_label_volume(X, classes: int | None = None) -> LabelVolume:
    """Accept a LabelVolume or a raw integer array (class count inferred
    from the maximum label unless given)."""
    if isinstance(X, LabelVolume):
        return X
    a = np.asarray(X)
    if a.ndim not in (2, 3):
        raise BadRankError(f"label arrays must be 2D or 3D, got rank {a.ndim}")
    n_classes = classes if classes is not None else max(2, int(a.max(initial=0)) + 1)
    return LabelVolume(a, n_classes, GridShape(a.shape))


def as_image(X) -> np.ndarray:
    """Accept a 2D/3D array of intensities in [0, 1]; returns float64."""
    a = np.asarray(X, dtype=np.float64)
    if a.ndim not in (2, 3):
        raise BadRankError(f"images must be 2D or 3D, got rank {a.ndim}")
    if not np.isfinite(a).all():
        raise OutOfRangeError("image intensities must be finite")
    if a.size and (a.min() < 0.0 or a.max() > 1.0):
        raise OutOfRangeError("image intensities must lie in [0, 1]")
    return a
