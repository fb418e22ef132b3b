"""Pipeline configuration: thresholds, distribution constants, edge and
fusion settings. Loadable from JSON; all fields validated on construction."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields, replace

from .errors import BadConfigError

MASK_MODES = ("hierarchical", "nig_only")
FUSION_MODES = ("hard", "soft")


@dataclass(frozen=True)
class CannyParams:
    """Edge-detector settings.

    Thresholds apply to gradient magnitude normalized by its image-wide
    maximum, so they are relative and live in (0, 1]. The Gaussian kernel is
    truncated at radius ceil(3 * sigma).
    """

    sigma: float = 1.0
    low: float = 0.04
    high: float = 0.1

    def __post_init__(self):
        if not self.sigma > 0:
            raise BadConfigError(f"sigma must be > 0, got {self.sigma}")
        if not (0 < self.low < self.high <= 1):
            raise BadConfigError(
                f"need 0 < low < high <= 1, got low={self.low}, high={self.high}"
            )

    @property
    def radius(self) -> int:
        return math.ceil(3 * self.sigma)


@dataclass(frozen=True)
class PipelineConfig:
    """All knobs of the refinement pipeline.

    tau1 gates voxel entropy (coarse stage), tau2 gates the Normal-Inverse-
    Gamma variance (fine stage). kappa/epsilon shape the Inverse-Gamma
    evidence from label disagreement; zeta1/zeta2 and eta1/eta2 map regional
    entropy onto the scale and precision parameters. epsilon > 1 guarantees
    a finite positive variance everywhere.
    """

    tau1: float = 0.2
    tau2: float = 0.2
    kappa: float = 1.0
    epsilon: float = 2.0
    zeta1: float = 5.0
    zeta2: float = 0.1
    eta1: float = 1.0
    eta2: float = 10.0
    n_candidates: int = 6
    canny: CannyParams = field(default_factory=CannyParams)
    align_radius: int = 0
    mask_mode: str = "hierarchical"
    fusion_mode: str = "hard"
    seed: int = 0

    def __post_init__(self):
        if not self.tau1 >= 0:
            raise BadConfigError(f"tau1 must be >= 0, got {self.tau1}")
        if not self.tau2 > 0:
            raise BadConfigError(f"tau2 must be > 0, got {self.tau2}")
        for name in ("kappa", "zeta1", "eta1"):
            if not getattr(self, name) > 0:
                raise BadConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("zeta2", "eta2"):
            if not getattr(self, name) > 0:
                raise BadConfigError(f"{name} must be > 0, got {getattr(self, name)}")
        if not self.epsilon > 1:
            raise BadConfigError(
                f"epsilon must be > 1 so the variance exists, got {self.epsilon}"
            )
        if not self.n_candidates >= 1:
            raise BadConfigError(f"n_candidates must be >= 1, got {self.n_candidates}")
        if self.align_radius < 0:
            raise BadConfigError(f"align_radius must be >= 0, got {self.align_radius}")
        if self.mask_mode not in MASK_MODES:
            raise BadConfigError(f"mask_mode must be one of {MASK_MODES}")
        if self.fusion_mode not in FUSION_MODES:
            raise BadConfigError(f"fusion_mode must be one of {FUSION_MODES}")
        if not (-(2**63) <= int(self.seed) < 2**64):
            raise BadConfigError("seed must fit in 64 bits")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        """Build a config from a (possibly partial) JSON-style dict.

        Unknown keys are rejected so typos do not silently fall back to
        defaults.
        """
        data = dict(data)
        canny_data = data.pop("canny", None)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise BadConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            canny = CannyParams(**canny_data) if canny_data is not None else CannyParams()
        except TypeError as exc:
            raise BadConfigError(f"bad canny section: {exc}") from exc
        try:
            return cls(canny=canny, **data)
        except TypeError as exc:
            raise BadConfigError(str(exc)) from exc

    def override(self, **kwargs) -> "PipelineConfig":
        """Return a copy with the given fields replaced (None values ignored)."""
        updates = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **updates) if updates else self
