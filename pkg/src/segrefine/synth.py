"""Deterministic synthetic data for exercising the pipeline end to end:
nested-ellipsoid phantoms, domain-shift-style corrupted probability maps,
stochastic candidate renders, and a nearest-intensity toy segmenter.

All randomness goes through numpy's PCG64 generator seeded explicitly, so
every output is a pure function of (inputs, seed). Per-task child seeds are
derived by mixing (seed, index) through ``numpy.random.SeedSequence``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import BadSpecError
from .grid import GridShape, LabelVolume, ProbVolume, one_hot

# Logit magnitude of an uncorrupted one-hot voxel; keeps clean voxels
# confident (entropy well under typical thresholds) after softmax.
LOGIT_SCALE = 8.0
# A flipped voxel's wrong class beats the current maximum by a margin in
# this range, leaving the top two logits close: flips look uncertain.
FLIP_MARGIN = (0.1, 2.0)
# Smoothing sigma of the random displacement fields used for edge jitter;
# larger values move boundaries more coherently.
JITTER_SMOOTHNESS = 4.0


def _u64(seed: int) -> int:
    return int(seed) % (1 << 64)


def rng_for(seed: int) -> np.random.Generator:
    """PCG64 generator for a task seed (platform-independent stream)."""
    return np.random.Generator(np.random.PCG64(_u64(seed)))


def child_rng(seed: int, index: int) -> np.random.Generator:
    """Independent child generator for task ``index`` under ``seed``."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence((_u64(seed), int(index))))
    )


def child_seed(seed: int, index: int) -> int:
    """64-bit child seed mixing (seed, index); stable across platforms."""
    ss = np.random.SeedSequence((_u64(seed), int(index)))
    return int(ss.generate_state(1, np.uint64)[0])


def class_intensity_table(classes: int) -> tuple[float, ...]:
    """Canonical per-class intensities: evenly spaced over [0, 1]."""
    return tuple(np.linspace(0.0, 1.0, classes))


def _as_axes(entry, rank: int) -> tuple[float, ...]:
    if np.isscalar(entry):
        return (float(entry),) * rank
    axes = tuple(float(a) for a in entry)
    if len(axes) != rank:
        raise BadSpecError(f"semi-axes {axes} do not match rank {rank}")
    return axes


@dataclass(frozen=True)
class PhantomSpec:
    """Nested-ellipsoid phantom: one ellipsoid per foreground class,
    outermost first, inner levels overriding outer ones."""

    shape: GridShape
    classes: int
    nesting: tuple
    seed: int = 0

    def __post_init__(self):
        if not (2 <= self.classes <= 4):
            raise BadSpecError(f"classes must be in [2, 4], got {self.classes}")
        if len(self.nesting) != self.classes - 1:
            raise BadSpecError(
                f"need {self.classes - 1} nesting levels, got {len(self.nesting)}"
            )
        rank = self.shape.rank
        levels = tuple(_as_axes(entry, rank) for entry in self.nesting)
        for axes in levels:
            if any(a <= 0 for a in axes):
                raise BadSpecError(f"semi-axes must be positive, got {axes}")
        for outer, inner in zip(levels, levels[1:]):
            if not all(i < o for i, o in zip(inner, outer)):
                raise BadSpecError(
                    f"semi-axes must strictly decrease: {outer} -> {inner}"
                )
        half = tuple((d - 1) / 2.0 for d in self.shape.dims)
        if any(a > h for a, h in zip(levels[0], half)):
            raise BadSpecError(
                f"outermost ellipsoid {levels[0]} does not fit in {self.shape.dims}"
            )
        object.__setattr__(self, "nesting", levels)


def make_phantom(spec: PhantomSpec) -> tuple[LabelVolume, np.ndarray]:
    """Rasterize the phantom and its clean intensity image.

    The common center is jittered (seeded) within the slack that keeps the
    outermost ellipsoid inside the volume. The clean image assigns each
    class its canonical intensity. Raises ``BadSpec`` if any foreground
    class rasterizes to zero voxels.
    """
    rng = rng_for(spec.seed)
    dims = spec.shape.dims
    half = np.array([(d - 1) / 2.0 for d in dims])
    slack = half - np.array(spec.nesting[0])
    jitter = np.array([rng.uniform(-s, s) if s > 0 else 0.0 for s in slack])
    center = half + jitter

    coords = np.indices(dims, dtype=np.float64)
    labels = np.zeros(dims, dtype=np.uint8)
    for level, axes in enumerate(spec.nesting):
        q = np.zeros(dims, dtype=np.float64)
        for a in range(len(dims)):
            q += ((coords[a] - center[a]) / axes[a]) ** 2
        labels[q <= 1.0] = level + 1

    counts = np.bincount(labels.ravel(), minlength=spec.classes)
    for cls in range(1, spec.classes):
        if counts[cls] == 0:
            raise BadSpecError(f"foreground class {cls} is empty after rasterization")

    table = np.asarray(class_intensity_table(spec.classes))
    image = table[labels]
    return LabelVolume(labels, spec.classes, spec.shape), image


@dataclass(frozen=True)
class CorruptionSpec:
    """Degradation of a clean label map into a noisy probability map."""

    boundary_blur_sigma: float = 0.0
    logit_noise_std: float = 0.0
    flip_rate: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.boundary_blur_sigma < 0 or self.logit_noise_std < 0:
            raise BadSpecError("blur sigma and noise std must be non-negative")
        if not (0.0 <= self.flip_rate <= 0.5):
            raise BadSpecError(f"flip_rate must be in [0, 0.5], got {self.flip_rate}")


def corrupt_probmap(gt: LabelVolume, spec: CorruptionSpec) -> ProbVolume:
    """Simulate a degraded model output for a known label volume.

    One-hot logits (scaled for confidence) are blurred per channel, given
    Gaussian logit noise, and a seeded fraction of voxels has a wrong
    class's logit raised just above the maximum — confidently placed but
    narrowly winning, so flipped voxels read as uncertain. A softmax
    renormalizes everything.
    """
    rng = rng_for(spec.seed)
    logits = one_hot(gt).values.astype(np.float64) * LOGIT_SCALE

    if spec.boundary_blur_sigma > 0:
        s = spec.boundary_blur_sigma
        radius = int(np.ceil(3.0 * s))
        sigma = (0.0,) + (s,) * gt.grid.rank
        radii = (0,) + (radius,) * gt.grid.rank
        logits = ndimage.gaussian_filter(logits, sigma=sigma, mode="reflect", radius=radii)

    if spec.logit_noise_std > 0:
        logits = logits + rng.normal(0.0, spec.logit_noise_std, logits.shape)

    if spec.flip_rate > 0:
        classes = gt.classes
        n_vox = gt.grid.n_voxels
        n_flip = int(round(spec.flip_rate * n_vox))
        if n_flip > 0:
            idx = rng.choice(n_vox, size=n_flip, replace=False)
            true_cls = gt.values.reshape(-1)[idx].astype(np.int64)
            wrong = (true_cls + 1 + rng.integers(0, classes - 1, size=n_flip)) % classes
            margins = rng.uniform(FLIP_MARGIN[0], FLIP_MARGIN[1], size=n_flip)
            flat = logits.reshape(classes, -1)
            flat[wrong, idx] = flat[:, idx].max(axis=0) + margins

    logits -= logits.max(axis=0, keepdims=True)
    np.exp(logits, out=logits)
    logits /= logits.sum(axis=0, keepdims=True)
    return ProbVolume(logits.astype(np.float32), gt.grid)


@dataclass(frozen=True)
class RenderSpec:
    """Stochastic render of a label map into an intensity image.

    quality = 1 reproduces the exact class-intensity render; lower quality
    jitters class boundaries (up to ``edge_jitter * (1 - quality)`` pixels)
    and adds intensity noise scaled the same way.
    """

    quality: float
    class_intensities: tuple
    noise_std: float = 0.05
    edge_jitter: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.quality <= 1.0):
            raise BadSpecError(f"quality must be in [0, 1], got {self.quality}")
        table = tuple(float(t) for t in self.class_intensities)
        if any(t < 0.0 or t > 1.0 for t in table):
            raise BadSpecError("class intensities must lie in [0, 1]")
        gaps = [
            abs(a - b) for i, a in enumerate(table) for b in table[i + 1 :]
        ]
        if gaps and min(gaps) < 0.15:
            raise BadSpecError(
                f"class intensities need pairwise gaps >= 0.15, got min {min(gaps):.3g}"
            )
        if self.noise_std < 0 or self.edge_jitter < 0:
            raise BadSpecError("noise_std and edge_jitter must be non-negative")
        object.__setattr__(self, "class_intensities", table)


def render_candidate(y: LabelVolume, spec: RenderSpec) -> np.ndarray:
    """Render a label volume to a [0, 1] intensity image (same rank).

    Boundaries are displaced by a smooth seeded field with peak amplitude
    ``edge_jitter * (1 - quality)`` voxels per axis, then per-class
    intensities plus Gaussian noise are applied and clamped to [0, 1].
    """
    if len(spec.class_intensities) != y.classes:
        raise BadSpecError(
            f"render table has {len(spec.class_intensities)} entries "
            f"for {y.classes} classes"
        )
    rng = rng_for(spec.seed)
    dims = y.grid.dims
    labels = y.values

    amplitude = spec.edge_jitter * (1.0 - spec.quality)
    if amplitude > 0:
        base = np.indices(dims, dtype=np.float64)
        warped = []
        for a in range(len(dims)):
            field = ndimage.gaussian_filter(
                rng.standard_normal(dims), JITTER_SMOOTHNESS, mode="reflect"
            )
            peak = np.abs(field).max()
            if peak > 0:
                field *= amplitude / peak
            warped.append(base[a] + field)
        labels = ndimage.map_coordinates(labels, warped, order=0, mode="nearest")

    table = np.asarray(spec.class_intensities, dtype=np.float64)
    image = table[labels]

    noise_scale = spec.noise_std * (1.0 - spec.quality)
    if noise_scale > 0:
        image = image + rng.normal(0.0, noise_scale, dims)
    return np.clip(image, 0.0, 1.0)


def toy_segment(img: np.ndarray, class_intensities) -> LabelVolume:
    """Assign each voxel the class with the nearest mean intensity.

    Ties go to the lowest class id. Inverts a clean render exactly.
    """
    table = tuple(float(t) for t in class_intensities)
    if len(table) < 2 or len(set(table)) != len(table):
        raise BadSpecError("need at least two distinct class intensities")
    a = np.asarray(img, dtype=np.float64)
    diffs = np.abs(a[np.newaxis] - np.asarray(table).reshape((-1,) + (1,) * a.ndim))
    labels = np.argmin(diffs, axis=0).astype(np.uint8)
    return LabelVolume(labels, len(table), GridShape(a.shape))
