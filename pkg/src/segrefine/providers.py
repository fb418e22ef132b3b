"""Adapters for the two external models the pipeline abstracts over: the
candidate image generator and the frozen segmentation model.

File-backed providers read NPY arrays from disk (one file per candidate
index); synthetic providers close the loop for tests and demos.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import ProviderError, RefineError
from .grid import LabelVolume
from .synth import (
    RenderSpec,
    child_seed,
    class_intensity_table,
    render_candidate,
    toy_segment,
)


class CandidateProvider(Protocol):
    def generate(
        self, condition: LabelVolume, n: int, seed: int
    ) -> list[np.ndarray]: ...


class SegProvider(Protocol):
    def segment(
        self, image: np.ndarray, index: int, classes: int
    ) -> LabelVolume: ...


def _sorted_npy(directory: Path) -> list[Path]:
    files = sorted(p for p in directory.glob("*.npy"))
    if not files:
        raise ProviderError(f"no .npy files in {directory}")
    return files


class DirCandidateProvider:
    """Candidates are pre-rendered images in a directory, sorted by name."""

    def __init__(self, directory):
        self.directory = Path(directory)

    def generate(self, condition, n, seed):
        from .npyio import read_array

        files = _sorted_npy(self.directory)
        if len(files) < n:
            raise ProviderError(
                f"{self.directory} holds {len(files)} candidates, need {n}"
            )
        out = []
        for path in files[:n]:
            try:
                img = read_array(path, "image")
            except RefineError as exc:
                raise ProviderError(f"bad candidate file {path}: {exc}") from exc
            if img.shape != condition.grid.dims:
                raise ProviderError(
                    f"candidate {path} shape {img.shape} vs {condition.grid.dims}"
                )
            out.append(img)
        return out


class SynthCandidateProvider:
    """Renders candidates from the condition labels.

    The given specs act as templates cycled over the candidate indices;
    candidate i is rendered with a child seed mixed from (pipeline seed, i)
    so runs are reproducible end to end.
    """

    def __init__(self, specs: Sequence[RenderSpec]):
        if not specs:
            raise ProviderError("need at least one render spec")
        self.specs = list(specs)

    def generate(self, condition, n, seed):
        out = []
        for i in range(n):
            template = self.specs[i % len(self.specs)]
            spec = RenderSpec(
                quality=template.quality,
                class_intensities=template.class_intensities,
                noise_std=template.noise_std,
                edge_jitter=template.edge_jitter,
                seed=child_seed(seed, i),
            )
            out.append(render_candidate(condition, spec))
        return out


class FileSegProvider:
    """Precomputed segmentations, one labels file per candidate index."""

    def __init__(self, directory):
        self.directory = Path(directory)

    def segment(self, image, index, classes):
        files = _sorted_npy(self.directory)
        if index >= len(files):
            raise ProviderError(
                f"{self.directory} holds {len(files)} segmentations, "
                f"need index {index}"
            )
        from .npyio import read_array

        path = files[index]
        try:
            seg = read_array(path, "labels", classes=classes)
        except RefineError as exc:
            raise ProviderError(f"bad segmentation file {path}: {exc}") from exc
        if seg.grid.dims != image.shape:
            raise ProviderError(
                f"segmentation {path} shape {seg.grid.dims} vs image {image.shape}"
            )
        return seg


class ToySegProvider:
    """Nearest-intensity segmentation; inverts clean renders exactly."""

    def __init__(self, class_intensities=None):
        self.class_intensities = (
            tuple(class_intensities) if class_intensities is not None else None
        )

    def segment(self, image, index, classes):
        table = self.class_intensities or class_intensity_table(classes)
        if len(table) != classes:
            raise ProviderError(
                f"toy segmenter has {len(table)} intensities for {classes} classes"
            )
        return toy_segment(image, table)


@dataclass(frozen=True)
class ProviderConfig:
    """Resolved candidate + segmentation providers for a pipeline run."""

    candidate: CandidateProvider
    seg: SegProvider

    @classmethod
    def from_dict(cls, data: dict) -> "ProviderConfig":
        """Parse the JSON providers section.

        Schema::

            {"candidate_provider": {"dir": "path"} | {"synth": [render spec, ...]},
             "seg_provider": {"file": "path"} | {"toy": {"class_intensities": [...]}}}
        """
        try:
            cand_cfg = data["candidate_provider"]
            seg_cfg = data["seg_provider"]
        except (KeyError, TypeError) as exc:
            raise ProviderError(
                "providers need 'candidate_provider' and 'seg_provider'"
            ) from exc

        if "dir" in cand_cfg:
            candidate = DirCandidateProvider(cand_cfg["dir"])
        elif "synth" in cand_cfg:
            try:
                specs = [RenderSpec(**entry) for entry in cand_cfg["synth"]]
            except (TypeError, RefineError) as exc:
                raise ProviderError(f"bad synth render specs: {exc}") from exc
            candidate = SynthCandidateProvider(specs)
        else:
            raise ProviderError("candidate_provider needs 'dir' or 'synth'")

        if "file" in seg_cfg:
            seg = FileSegProvider(seg_cfg["file"])
        elif "toy" in seg_cfg:
            seg = ToySegProvider((seg_cfg["toy"] or {}).get("class_intensities"))
        else:
            raise ProviderError("seg_provider needs 'file' or 'toy'")
        return cls(candidate=candidate, seg=seg)
