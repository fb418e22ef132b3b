"""Size-aware composition of two label volumes.

The smallest foreground class (by voxel count) is sourced exclusively from
the refined pseudo-labels; every other class comes from the candidate
segmentation. Inverse-count weights are reported alongside and drive the
optional soft mixing mode.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadConfigError, NoForegroundError, ShapeMismatchError
from .grid import LabelVolume


@dataclass(frozen=True)
class SizeStats:
    """Foreground voxel counts, the smallest populated class, and the
    inverse-count weights over populated classes (summing to 1)."""

    counts: dict[int, int]
    v_min_class: int
    lambdas: dict[int, float]


def class_sizes(y: LabelVolume) -> SizeStats:
    """Count foreground voxels per class.

    Classes with zero voxels are excluded from both the minimum and the
    weights; ties on the minimum go to the lowest class id. Raises
    ``NoForeground`` when the volume is all background.
    """
    counts_all = np.bincount(y.values.ravel(), minlength=y.classes)
    counts = {c: int(counts_all[c]) for c in range(1, y.classes)}
    populated = {c: n for c, n in counts.items() if n > 0}
    if not populated:
        raise NoForegroundError("label volume has no foreground voxels")
    v_min_class = min(populated, key=lambda c: (populated[c], c))
    inv_total = sum(1.0 / n for n in populated.values())
    lambdas = {c: (1.0 / n) / inv_total for c, n in populated.items()}
    return SizeStats(counts=counts, v_min_class=v_min_class, lambdas=lambdas)


def size_aware_fuse(
    y_star: LabelVolume, seg_ib: LabelVolume, mode: str = "hard"
) -> LabelVolume:
    """Fuse refined pseudo-labels with a candidate segmentation.

    Hard mode: voxels of the smallest class c_min come only from ``y_star``;
    all other voxels take ``seg_ib``, except that seg_ib's own c_min claims
    are dropped to background (the c_min channel is exclusive to y_star).

    Soft mode: one-hot channels are mixed — weight lambda_{c_min} on
    y_star's c_min channel, the residual weight on every other seg_ib
    channel — and the argmax is taken, ties to the lowest class id.
    """
    if y_star.grid.dims != seg_ib.grid.dims or y_star.classes != seg_ib.classes:
        raise ShapeMismatchError("fusion inputs must share shape and class count")
    stats = class_sizes(y_star)
    c_min = stats.v_min_class

    if mode == "hard":
        out = np.where(seg_ib.values == c_min, np.uint8(0), seg_ib.values)
        out = np.where(y_star.values == c_min, np.uint8(c_min), out)
        return LabelVolume(out.astype(np.uint8), y_star.classes, y_star.grid)

    if mode == "soft":
        lam = stats.lambdas[c_min]
        mix = np.zeros((y_star.classes,) + y_star.grid.dims, dtype=np.float64)
        mix[c_min] = lam * (y_star.values == c_min)
        for c in range(y_star.classes):
            if c != c_min:
                mix[c] = (1.0 - lam) * (seg_ib.values == c)
        fused = np.argmax(mix, axis=0).astype(np.uint8)
        return LabelVolume(fused, y_star.classes, y_star.grid)

    raise BadConfigError(f"unknown fusion mode {mode!r}")


def fuse_or_bypass(
    y_star: LabelVolume, seg_ib: LabelVolume, mode: str = "hard"
) -> LabelVolume:
    """Size-aware fusion, skipped for single-class tasks.

    When exactly one foreground class is present in ``y_star`` the candidate
    segmentation is returned unchanged; with several classes this delegates
    to :func:`size_aware_fuse`.
    """
    stats = class_sizes(y_star)
    populated = [c for c, n in stats.counts.items() if n > 0]
    if len(populated) == 1:
        return seg_ib
    return size_aware_fuse(y_star, seg_ib, mode)
