"""Canny edge detection, label-map edges, and structural-consistency
candidate selection.

The detector is staged classically: Gaussian blur, 3x3 Sobel gradients,
magnitude normalization by the image-wide maximum, non-maximum suppression
with the gradient direction quantized to four bins, double thresholding,
and hysteresis keeping weak pixels 8-connected to strong ones. Thresholds
are therefore relative to the strongest gradient in the image.

Candidates are scored by the fraction of condition edge pixels matched by
candidate edge pixels; 3D volumes are scored slice-wise along the depth
axis with counts pooled before the ratio, since the detector is a 2D
operator.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import ndimage

from .config import CannyParams, PipelineConfig
from .errors import (
    BadParamsError,
    BadRankError,
    EmptyConditionEdgesError,
    OutOfRangeError,
    ShapeMismatchError,
)
from .grid import GridShape, LabelVolume

# Sobel kernels, row = image y axis, column = image x axis.
_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = _SOBEL_X.T

# Canonical step per direction bin (row, col): 0, 45, 90, 135 degrees.
_BIN_STEPS = ((0, 1), (1, 1), (1, 0), (1, -1))


@dataclass(frozen=True)
class EdgeMap:
    """Boolean edge mask over a 2D grid."""

    values: np.ndarray
    grid: GridShape

    def __post_init__(self):
        v = np.asarray(self.values, dtype=bool)
        if v.ndim != 2:
            raise BadRankError("edge maps are 2D")
        if v.shape != self.grid.dims:
            raise ShapeMismatchError(f"edges {v.shape} vs grid {self.grid.dims}")
        v = np.ascontiguousarray(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.values))


@dataclass(frozen=True)
class CandidateScore:
    """Structural consistency of one candidate against the condition edges.

    ``score = matched / condition_edges``; matched counts condition pixels
    with a candidate edge within the alignment radius, so score <= 1.
    """

    index: int
    score: float
    matched: int
    condition_edges: int


def _check_image(img: np.ndarray) -> np.ndarray:
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 2:
        raise BadRankError(f"expected a 2D image, got rank {a.ndim}")
    if not np.isfinite(a).all():
        raise OutOfRangeError("image intensities must be finite")
    if a.size and (a.min() < 0.0 or a.max() > 1.0):
        raise OutOfRangeError("image intensities must lie in [0, 1]")
    return a


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian smoothing, kernel radius ceil(3*sigma), reflective
    borders, kernel normalized to sum 1."""
    if not sigma > 0:
        raise BadParamsError(f"sigma must be > 0, got {sigma}")
    a = np.asarray(img, dtype=np.float64)
    radius = int(np.ceil(3.0 * sigma))
    return ndimage.gaussian_filter(a, sigma=sigma, mode="reflect", radius=radius)


def _nonmax_suppress(mag: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Thin ridges to single-pixel width along the quantized gradient.

    A pixel survives if it is >= its forward neighbor and > its backward
    neighbor along the gradient direction; the asymmetry resolves two-pixel
    plateaus deterministically (the lower-index pixel wins).
    """
    h, w = mag.shape
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    bins = np.zeros(mag.shape, dtype=np.uint8)
    bins[(angle >= 22.5) & (angle < 67.5)] = 1
    bins[(angle >= 67.5) & (angle < 112.5)] = 2
    bins[(angle >= 112.5) & (angle < 157.5)] = 3

    padded = np.pad(mag, 1, mode="constant", constant_values=0.0)
    out = np.zeros_like(mag)
    for b, (di, dj) in enumerate(_BIN_STEPS):
        fwd = padded[1 + di : 1 + di + h, 1 + dj : 1 + dj + w]
        bwd = padded[1 - di : 1 - di + h, 1 - dj : 1 - dj + w]
        keep = (bins == b) & (mag > 0.0) & (mag >= fwd) & (mag > bwd)
        out[keep] = mag[keep]
    return out


def canny(img: np.ndarray, params: CannyParams | None = None) -> EdgeMap:
    """Detect edges in a [0, 1] grayscale image.

    Gradient magnitude is normalized by its maximum before thresholding;
    an all-flat image (maximum 0) yields an empty edge map.
    """
    params = params or CannyParams()
    a = _check_image(img)
    grid = GridShape(a.shape)

    smoothed = gaussian_blur(a, params.sigma)
    gx = ndimage.correlate(smoothed, _SOBEL_X, mode="reflect")
    gy = ndimage.correlate(smoothed, _SOBEL_Y, mode="reflect")
    mag = np.hypot(gx, gy)
    peak = mag.max()
    # flat images can carry ~1e-16 border-summation residue; treat as zero
    if peak <= 1e-12:
        return EdgeMap(np.zeros(a.shape, dtype=bool), grid)
    mag /= peak

    thinned = _nonmax_suppress(mag, gx, gy)
    strong = thinned >= params.high
    weak = thinned >= params.low
    if not strong.any():
        return EdgeMap(np.zeros(a.shape, dtype=bool), grid)

    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    keep = np.zeros(labels.max() + 1, dtype=bool)
    keep[np.unique(labels[strong])] = True
    keep[0] = False
    return EdgeMap(keep[labels], grid)


def _label_slice_image(values: np.ndarray, classes: int) -> np.ndarray:
    # map class ids linearly onto [0, 1]
    return values.astype(np.float64) / float(classes - 1)


def label_edge_map(y: LabelVolume, params: CannyParams | None = None) -> EdgeMap:
    """Edges of a 2D label map, with class ids mapped linearly to [0, 1]."""
    if y.grid.rank != 2:
        raise BadRankError("label_edge_map takes a 2D label slice")
    return canny(_label_slice_image(y.values, y.classes), params)


def _matched_count(cand: np.ndarray, cond: np.ndarray, align_radius: int) -> int:
    if align_radius == 0:
        return int(np.count_nonzero(cand & cond))
    size = 2 * align_radius + 1
    reach = ndimage.binary_dilation(cand, structure=np.ones((size, size), dtype=bool))
    return int(np.count_nonzero(cond & reach))


def consistency_score(
    e_cand: EdgeMap, e_cond: EdgeMap, align_radius: int = 0, index: int = 0
) -> CandidateScore:
    """Fraction of condition edge pixels matched by the candidate's edges.

    With ``align_radius = 0`` a match is an exact pixel intersection; with
    radius r a condition pixel matches if a candidate edge lies within
    Chebyshev distance r. Raises ``EmptyConditionEdges`` when the condition
    has no edge pixels (the ratio is undefined).
    """
    if e_cand.grid.dims != e_cond.grid.dims:
        raise ShapeMismatchError(
            f"edge maps differ: {e_cand.grid.dims} vs {e_cond.grid.dims}"
        )
    if align_radius < 0:
        raise BadParamsError("align_radius must be >= 0")
    total = e_cond.count
    if total == 0:
        raise EmptyConditionEdgesError("condition edge map is empty")
    matched = _matched_count(e_cand.values, e_cond.values, align_radius)
    return CandidateScore(index, matched / total, matched, total)


def _slices(volume: np.ndarray) -> list[np.ndarray]:
    # 2D arrays are a single slice; 3D stacks slice along the depth axis
    return [volume] if volume.ndim == 2 else [volume[k] for k in range(volume.shape[0])]


def select_best(
    candidates: Sequence[np.ndarray],
    condition: LabelVolume,
    cfg: PipelineConfig | None = None,
) -> tuple[int, list[CandidateScore]]:
    """Pick the candidate image most structurally consistent with the
    condition label map.

    Candidates must share the condition's grid. 3D inputs are scored
    slice-wise with matched / condition-edge counts pooled over slices
    before the ratio. Returns the argmax index (ties to the lowest index)
    and every candidate's score for reporting.
    """
    cfg = cfg or PipelineConfig()
    if len(candidates) == 0:
        raise BadParamsError("need at least one candidate")

    cond_slices = _slices(condition.values)
    cond_maps = [
        canny(_label_slice_image(s, condition.classes), cfg.canny) for s in cond_slices
    ]
    cond_total = sum(m.count for m in cond_maps)
    if cond_total == 0:
        raise EmptyConditionEdgesError("condition has no edges in any slice")

    scores: list[CandidateScore] = []
    for i, cand in enumerate(candidates):
        a = np.asarray(cand, dtype=np.float64)
        if a.shape != condition.grid.dims:
            raise ShapeMismatchError(
                f"candidate {i} shape {a.shape} vs condition {condition.grid.dims}"
            )
        matched = 0
        for sl, cond_map in zip(_slices(a), cond_maps):
            cand_map = canny(sl, cfg.canny)
            matched += _matched_count(
                cand_map.values, cond_map.values, cfg.align_radius
            )
        scores.append(CandidateScore(i, matched / cond_total, matched, cond_total))

    best = max(range(len(scores)), key=lambda i: scores[i].score)
    # max() already keeps the first (lowest-index) argmax on ties
    return best, scores
