"""Per-class overlap and surface-distance metrics for label volumes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import BadParamsError, EmptySurfaceError, ShapeMismatchError
from .grid import LabelVolume


@dataclass(frozen=True)
class ClassMetrics:
    dice: float
    asd: float | None  # None when either surface is empty


@dataclass(frozen=True)
class MetricsReport:
    """Per-foreground-class Dice and average surface distance, plus means.

    Classes whose surface distance is undefined (one side empty) are
    skipped from ``mean_asd`` and listed in ``asd_skipped``.
    """

    per_class: dict[int, ClassMetrics]
    mean_dice: float
    mean_asd: float | None
    asd_skipped: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "per_class": {
                str(c): {"dice": m.dice, "asd": m.asd}
                for c, m in sorted(self.per_class.items())
            },
            "mean_dice": self.mean_dice,
            "mean_asd": self.mean_asd,
            "asd_skipped": list(self.asd_skipped),
        }


def _check_pair(pred: LabelVolume, gt: LabelVolume, cls: int) -> None:
    if pred.grid.dims != gt.grid.dims:
        raise ShapeMismatchError(
            f"prediction {pred.grid.dims} vs ground truth {gt.grid.dims}"
        )
    if cls < 1:
        raise BadParamsError("metrics are defined for foreground classes (>= 1)")


def dice(pred: LabelVolume, gt: LabelVolume, cls: int) -> float:
    """2|A n B| / (|A| + |B|) for the binary masks of one class.

    Both masks empty counts as perfect agreement (1.0).
    """
    _check_pair(pred, gt, cls)
    a = pred.values == cls
    b = gt.values == cls
    na, nb = int(a.sum()), int(b.sum())
    if na + nb == 0:
        return 1.0
    inter = int(np.count_nonzero(a & b))
    return 2.0 * inter / (na + nb)


def surface_points(mask: np.ndarray, spacing: tuple[float, ...]) -> np.ndarray:
    """Physical coordinates of surface voxels of a binary mask.

    A foreground voxel is on the surface if it has a face-adjacent
    background voxel or lies on the volume border. Returns an (N, rank)
    float64 array of voxel centers scaled by spacing; empty masks give an
    empty array.
    """
    m = np.asarray(mask, dtype=bool)
    structure = ndimage.generate_binary_structure(m.ndim, 1)
    interior = ndimage.binary_erosion(m, structure=structure, border_value=0)
    surface = m & ~interior
    return np.argwhere(surface).astype(np.float64) * np.asarray(spacing, dtype=np.float64)


def asd(
    pred: LabelVolume,
    gt: LabelVolume,
    cls: int,
    spacing: tuple[float, ...] | None = None,
) -> float:
    """Symmetric average surface distance for one class, in mm.

    Mean nearest-surface distance from prediction to ground truth and back,
    averaged. Raises ``EmptySurface`` if either mask is empty for the class.
    """
    _check_pair(pred, gt, cls)
    sp = spacing if spacing is not None else pred.grid.spacing
    pts_pred = surface_points(pred.values == cls, sp)
    pts_gt = surface_points(gt.values == cls, sp)
    if len(pts_pred) == 0 or len(pts_gt) == 0:
        raise EmptySurfaceError(f"class {cls} has an empty surface")
    d_pg = cKDTree(pts_gt).query(pts_pred)[0].mean()
    d_gp = cKDTree(pts_pred).query(pts_gt)[0].mean()
    return float((d_pg + d_gp) / 2.0)


def evaluate(
    pred: LabelVolume,
    gt: LabelVolume,
    spacing: tuple[float, ...] | None = None,
) -> MetricsReport:
    """Dice and surface distance for every foreground class."""
    if pred.grid.dims != gt.grid.dims:
        raise ShapeMismatchError(
            f"prediction {pred.grid.dims} vs ground truth {gt.grid.dims}"
        )
    classes = max(pred.classes, gt.classes)
    per_class: dict[int, ClassMetrics] = {}
    skipped: list[int] = []
    for cls in range(1, classes):
        d = dice(pred, gt, cls)
        try:
            a = asd(pred, gt, cls, spacing)
        except EmptySurfaceError:
            a = None
            skipped.append(cls)
        per_class[cls] = ClassMetrics(dice=d, asd=a)
    dices = [m.dice for m in per_class.values()]
    asds = [m.asd for m in per_class.values() if m.asd is not None]
    return MetricsReport(
        per_class=per_class,
        mean_dice=float(np.mean(dices)) if dices else 1.0,
        mean_asd=float(np.mean(asds)) if asds else None,
        asd_skipped=tuple(skipped),
    )
