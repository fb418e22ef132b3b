"""Voxel-wise entropy, neighborhood-averaged regional entropy, and the
entropy threshold mask — the coarse stage of pseudo-label denoising."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import ShapeMismatchError
from .grid import LabelVolume, ProbVolume, ScalarField


@dataclass(frozen=True)
class EntropyMaps:
    """Per-voxel entropy H (bits, in [0, log2 C]) and its neighborhood mean
    E normalized to [0, 1]."""

    voxel_entropy: ScalarField
    regional_entropy: ScalarField


def voxel_entropy(p: ProbVolume) -> ScalarField:
    """Shannon entropy per voxel, H(v) = -sum_c P(c|v) * log2 P(c|v).

    Computed in float64 with the convention 0 * log2(0) = 0. Outputs are
    clipped to [0, log2 C] to absorb the tolerance band of near-normalized
    inputs.
    """
    v = p.values.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(v > 0.0, v * np.log2(v), 0.0)
    h = -terms.sum(axis=0)
    np.clip(h, 0.0, np.log2(p.classes), out=h)
    return ScalarField(h, p.grid)


def regional_entropy(h: ScalarField, classes: int) -> ScalarField:
    """Mean entropy over the 3x3 (2D) or 3x3x3 (3D) neighborhood of each
    voxel, normalized by log2(classes) so values lie in [0, 1].

    Windows are clipped to in-bounds voxels at the borders; no values are
    invented outside the volume.
    """
    kernel = np.ones((3,) * h.grid.rank, dtype=np.float64)
    sums = ndimage.correlate(h.values, kernel, mode="constant", cval=0.0)
    counts = ndimage.correlate(
        np.ones(h.grid.dims, dtype=np.float64), kernel, mode="constant", cval=0.0
    )
    e = sums / counts / np.log2(classes)
    np.clip(e, 0.0, 1.0, out=e)
    return ScalarField(e, h.grid)


def entropy_mask(y: LabelVolume, h: ScalarField, tau1: float) -> LabelVolume:
    """Keep y(v) where H(v) <= tau1, set everything else to background."""
    if y.grid.dims != h.grid.dims:
        raise ShapeMismatchError(
            f"labels {y.grid.dims} vs entropy {h.grid.dims}"
        )
    kept = np.where(h.values <= tau1, y.values, np.uint8(0))
    return LabelVolume(kept.astype(np.uint8), y.classes, y.grid)


def entropy_maps(p: ProbVolume) -> EntropyMaps:
    """Convenience: both entropy fields of a probability volume."""
    h = voxel_entropy(p)
    return EntropyMaps(h, regional_entropy(h, p.classes))
