"""Scikit-learn style wrappers around the functional core, so the stages
compose with pipelines, grid search and cloning via get_params/set_params.

All estimators are learning-free: ``fit`` only validates parameters (and,
where it reads data, caches derived state such as condition edges or class
sizes); the actual work happens in ``transform`` / ``predict``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .config import CannyParams, PipelineConfig
from .edges import select_best
from .fusion import class_sizes, fuse_or_bypass
from .nig import hierarchical_denoise
from .pipeline import refine_volume
from .validation import as_image, as_label_volume, as_prob_volume


class HierarchicalDenoiser(BaseEstimator, TransformerMixin):
    """Entropy + Normal-Inverse-Gamma denoising of probability maps.

    transform takes a (classes, *spatial) probability array (or ProbVolume)
    and returns the denoised label array; full diagnostics from the last
    transform are kept in ``diagnostics_``.
    """

    def __init__(
        self,
        tau1=0.2,
        tau2=0.2,
        kappa=1.0,
        epsilon=2.0,
        zeta1=5.0,
        zeta2=0.1,
        eta1=1.0,
        eta2=10.0,
        mask_mode="hierarchical",
    ):
        self.tau1 = tau1
        self.tau2 = tau2
        self.kappa = kappa
        self.epsilon = epsilon
        self.zeta1 = zeta1
        self.zeta2 = zeta2
        self.eta1 = eta1
        self.eta2 = eta2
        self.mask_mode = mask_mode

    def _config(self) -> PipelineConfig:
        return PipelineConfig(
            tau1=self.tau1,
            tau2=self.tau2,
            kappa=self.kappa,
            epsilon=self.epsilon,
            zeta1=self.zeta1,
            zeta2=self.zeta2,
            eta1=self.eta1,
            eta2=self.eta2,
            mask_mode=self.mask_mode,
        )

    def fit(self, X=None, y=None):
        self._config()  # parameter validation only; nothing is learned
        return self

    def transform(self, X) -> np.ndarray:
        result = hierarchical_denoise(as_prob_volume(X), self._config())
        self.diagnostics_ = result
        return np.array(result.y_star.values)


class EdgeGuidedSelector(BaseEstimator):
    """Pick the candidate image whose edges best cover the condition edges.

    fit stores the condition label map; predict scores a sequence of
    candidate images and returns the winning index (scores in ``scores_``).
    """

    def __init__(self, sigma=1.0, low=0.04, high=0.1, align_radius=0):
        self.sigma = sigma
        self.low = low
        self.high = high
        self.align_radius = align_radius

    def _config(self) -> PipelineConfig:
        return PipelineConfig(
            canny=CannyParams(sigma=self.sigma, low=self.low, high=self.high),
            align_radius=self.align_radius,
        )

    def fit(self, X, y=None):
        self._config()
        self.condition_ = as_label_volume(X)
        return self

    def predict(self, X) -> int:
        if not hasattr(self, "condition_"):
            raise NotFittedError("fit the selector on a condition label map first")
        candidates = [as_image(c) for c in X]
        best, scores = select_best(candidates, self.condition_, self._config())
        self.scores_ = scores
        return best


class SizeAwareFuser(BaseEstimator, TransformerMixin):
    """Compose refined pseudo-labels with a candidate segmentation.

    fit takes the refined pseudo-labels (computing class sizes); transform
    fuses a segmentation of the selected candidate with them. Single-class
    inputs bypass the fusion and pass the segmentation through.
    """

    def __init__(self, mode="hard"):
        self.mode = mode

    def fit(self, X, y=None):
        self.pseudo_ = as_label_volume(X)
        self.stats_ = class_sizes(self.pseudo_)
        return self

    def transform(self, X) -> np.ndarray:
        if not hasattr(self, "pseudo_"):
            raise NotFittedError("fit the fuser on refined pseudo-labels first")
        seg = as_label_volume(X, classes=self.pseudo_.classes)
        return np.array(fuse_or_bypass(self.pseudo_, seg, self.mode).values)


class RefinementPipeline(BaseEstimator, TransformerMixin):
    """End-to-end transform: probability map in, fused label map out.

    Needs a candidate provider and a segmentation provider (see
    ``segrefine.providers``); ``config`` is a PipelineConfig or None for
    defaults. The full run report of the last transform is in ``report_``.
    """

    def __init__(self, candidate_provider=None, seg_provider=None, config=None):
        self.candidate_provider = candidate_provider
        self.seg_provider = seg_provider
        self.config = config

    def fit(self, X=None, y=None):
        if self.candidate_provider is None or self.seg_provider is None:
            raise NotFittedError("both providers must be set")
        return self

    def transform(self, X) -> np.ndarray:
        from .providers import ProviderConfig

        self.fit()
        providers = ProviderConfig(self.candidate_provider, self.seg_provider)
        outcome = refine_volume(as_prob_volume(X), providers, self.config)
        self.report_ = outcome.report
        return np.array(outcome.labels.values)
