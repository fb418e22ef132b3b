"""Learning-free refinement of segmentation pseudo-labels.

Three inference-time stages over voxel grids: hierarchical uncertainty
denoising (entropy then Normal-Inverse-Gamma variance), edge-guided
selection of the most structurally consistent generated candidate, and
size-aware fusion of the refined pseudo-labels with the candidate's
segmentation.
"""

from .config import CannyParams, PipelineConfig
from .edges import (
    CandidateScore,
    EdgeMap,
    canny,
    consistency_score,
    gaussian_blur,
    label_edge_map,
    select_best,
)
from .entropy import EntropyMaps, entropy_mask, regional_entropy, voxel_entropy
from .errors import RefineError
from .estimators import (
    EdgeGuidedSelector,
    HierarchicalDenoiser,
    RefinementPipeline,
    SizeAwareFuser,
)
from .fusion import SizeStats, class_sizes, fuse_or_bypass, size_aware_fuse
from .grid import (
    GridShape,
    LabelVolume,
    ProbVolume,
    ScalarField,
    argmax_labels,
    one_hot,
    validate_prob,
)
from .metrics import MetricsReport, asd, dice, evaluate, surface_points
from .nig import (
    DenoiseResult,
    NigField,
    hierarchical_denoise,
    nig_logpdf,
    nig_params,
    nig_variance,
)
from .npyio import read_array, write_array
from .pipeline import RefineOutcome, refine_volume, run_pipeline
from .providers import ProviderConfig
from .synth import (
    CorruptionSpec,
    PhantomSpec,
    RenderSpec,
    corrupt_probmap,
    make_phantom,
    render_candidate,
    toy_segment,
)

__version__ = "0.1.0"

__all__ = [
    "CannyParams",
    "PipelineConfig",
    "CandidateScore",
    "EdgeMap",
    "canny",
    "consistency_score",
    "gaussian_blur",
    "label_edge_map",
    "select_best",
    "EntropyMaps",
    "entropy_mask",
    "regional_entropy",
    "voxel_entropy",
    "RefineError",
    "EdgeGuidedSelector",
    "HierarchicalDenoiser",
    "RefinementPipeline",
    "SizeAwareFuser",
    "SizeStats",
    "class_sizes",
    "fuse_or_bypass",
    "size_aware_fuse",
    "GridShape",
    "LabelVolume",
    "ProbVolume",
    "ScalarField",
    "argmax_labels",
    "one_hot",
    "validate_prob",
    "MetricsReport",
    "asd",
    "dice",
    "evaluate",
    "surface_points",
    "DenoiseResult",
    "NigField",
    "hierarchical_denoise",
    "nig_logpdf",
    "nig_params",
    "nig_variance",
    "read_array",
    "write_array",
    "RefineOutcome",
    "refine_volume",
    "run_pipeline",
    "ProviderConfig",
    "CorruptionSpec",
    "PhantomSpec",
    "RenderSpec",
    "corrupt_probmap",
    "make_phantom",
    "render_candidate",
    "toy_segment",
]
