"""Voxel-grid containers shared by the whole pipeline.

Volumes are thin immutable wrappers around numpy arrays. Probabilities are
stored as float32 with a per-class leading axis; labels are uint8 with class
0 reserved for background; scalar fields (entropy, variance, ...) are
float64. Arrays are flagged read-only on construction so instances can be
shared freely across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadRankError,
    NotNormalizedError,
    OutOfRangeError,
    ShapeMismatchError,
)

#: Normalization band for per-voxel probability sums.
PROB_SUM_TOLERANCE = 1e-4


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GridShape:
    """Extents (voxels) and physical spacing (mm) of a 2D or 3D grid.

    3D extents are ordered depth, height, width; 2D extents height, width.
    """

    dims: tuple[int, ...]
    spacing: tuple[float, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) not in (2, 3):
            raise BadRankError(f"grid must be 2D or 3D, got {len(dims)} axes")
        if any(d < 1 for d in dims):
            raise OutOfRangeError(f"every extent must be >= 1, got {dims}")
        spacing = tuple(float(s) for s in self.spacing) or (1.0,) * len(dims)
        if len(spacing) != len(dims):
            raise ShapeMismatchError("spacing must have one entry per axis")
        if any(s <= 0 for s in spacing):
            raise OutOfRangeError(f"spacing must be positive, got {spacing}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "spacing", spacing)

    @property
    def rank(self) -> int:
        return len(self.dims)

    @property
    def n_voxels(self) -> int:
        return int(np.prod(self.dims))


@dataclass(frozen=True)
class ProbVolume:
    """Per-voxel, per-class probabilities, shape ``(classes, *dims)``.

    Use :func:`validate_prob` to build one from an untrusted array; direct
    construction checks structure only and trusts the values.
    """

    values: np.ndarray
    grid: GridShape

    def __post_init__(self):
        v = self.values
        if v.ndim != self.grid.rank + 1 or v.shape[1:] != self.grid.dims:
            raise ShapeMismatchError(
                f"probability array {v.shape} does not match grid {self.grid.dims}"
            )
        if v.shape[0] < 2:
            raise OutOfRangeError("need at least 2 classes")
        if v.dtype != np.float32:
            v = v.astype(np.float32)
        object.__setattr__(self, "values", _freeze(v))

    @property
    def classes(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class LabelVolume:
    """Integer class map over a grid; class 0 is background."""

    values: np.ndarray
    classes: int
    grid: GridShape

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.shape != self.grid.dims:
            raise ShapeMismatchError(
                f"label array {v.shape} does not match grid {self.grid.dims}"
            )
        if not (2 <= self.classes <= 256):
            raise OutOfRangeError(f"classes must be in [2, 256], got {self.classes}")
        if v.dtype != np.uint8:
            if v.min(initial=0) < 0:
                raise OutOfRangeError("labels must be non-negative")
            v = v.astype(np.uint8)
        if v.size and int(v.max()) >= self.classes:
            raise OutOfRangeError(
                f"label {int(v.max())} out of range for {self.classes} classes"
            )
        object.__setattr__(self, "values", _freeze(v))

    def foreground_count(self) -> int:
        return int(np.count_nonzero(self.values))


@dataclass(frozen=True)
class ScalarField:
    """One float64 value per voxel (entropy, variance, distribution params)."""

    values: np.ndarray
    grid: GridShape

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.dims:
            raise ShapeMismatchError(
                f"scalar field {v.shape} does not match grid {self.grid.dims}"
            )
        object.__setattr__(self, "values", _freeze(v))


def validate_prob(
    raw: np.ndarray,
    tolerance: float = PROB_SUM_TOLERANCE,
    spacing: tuple[float, ...] = (),
) -> ProbVolume:
    """Validate a raw ``(classes, *dims)`` array into a :class:`ProbVolume`.

    Raises ``BadRank`` for ranks other than 3 or 4 (class axis included),
    ``OutOfRange`` for values outside [0, 1], and ``NotNormalized`` when any
    per-voxel sum deviates from 1 by more than ``tolerance``.
    """
    a = np.asarray(raw)
    if a.ndim not in (3, 4):
        raise BadRankError(
            f"expected rank 3 or 4 (class axis first), got rank {a.ndim}"
        )
    a = a.astype(np.float32, copy=False)
    if not np.isfinite(a).all():
        raise OutOfRangeError("probabilities must be finite")
    lo, hi = float(a.min()), float(a.max())
    if lo < 0.0 or hi > 1.0:
        raise OutOfRangeError(f"probabilities must lie in [0, 1], got [{lo}, {hi}]")
    sums = a.sum(axis=0, dtype=np.float64)
    err = float(np.abs(sums - 1.0).max())
    if err > tolerance:
        raise NotNormalizedError(
            f"per-voxel sums deviate from 1 by up to {err:.3g} (> {tolerance:g})"
        )
    return ProbVolume(a, GridShape(a.shape[1:], spacing))


def argmax_labels(p: ProbVolume) -> LabelVolume:
    """Most probable class per voxel; ties go to the lowest class id."""
    labels = np.argmax(p.values, axis=0).astype(np.uint8)
    return LabelVolume(labels, p.classes, p.grid)


def one_hot(l: LabelVolume) -> ProbVolume:
    """Channel view of a label map: 1.0 at the labelled class, 0.0 elsewhere."""
    eye = np.eye(l.classes, dtype=np.float32)
    return ProbVolume(np.moveaxis(eye[l.values], -1, 0), l.grid)


def check_same_grid(a, b) -> None:
    """Raise ``ShapeMismatch`` unless two volumes share grid dims."""
    if a.grid.dims != b.grid.dims:
        raise ShapeMismatchError(f"grids differ: {a.grid.dims} vs {b.grid.dims}")
