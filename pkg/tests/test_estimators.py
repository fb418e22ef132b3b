import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from segrefine import (
    EdgeGuidedSelector,
    HierarchicalDenoiser,
    PipelineConfig,
    ProviderConfig,
    RefinementPipeline,
    RenderSpec,
    SizeAwareFuser,
    fuse_or_bypass,
    hierarchical_denoise,
    refine_volume,
    select_best,
)
from segrefine.errors import BadConfigError
from segrefine.providers import SynthCandidateProvider, ToySegProvider
from segrefine.synth import class_intensity_table

from conftest import random_labels, random_prob


class TestHierarchicalDenoiser:
    def test_transform_matches_library_call(self):
        p = random_prob((8, 8, 8), 3, seed=0)
        est = HierarchicalDenoiser().fit()
        got = est.transform(np.array(p.values))
        expected = hierarchical_denoise(p, PipelineConfig())
        assert np.array_equal(got, expected.y_star.values)
        assert est.diagnostics_.variance.grid.dims == (8, 8, 8)

    def test_get_set_params_round_trip(self):
        est = HierarchicalDenoiser(tau1=0.3, mask_mode="nig_only")
        params = est.get_params()
        assert params["tau1"] == 0.3
        est2 = HierarchicalDenoiser().set_params(**params)
        assert est2.tau1 == 0.3 and est2.mask_mode == "nig_only"

    def test_clone(self):
        est = HierarchicalDenoiser(tau2=0.5)
        assert clone(est).tau2 == 0.5

    def test_invalid_params_raise_at_fit(self):
        est = HierarchicalDenoiser(epsilon=0.5)  # construction never validates
        with pytest.raises(BadConfigError):
            est.fit()

    def test_works_inside_sklearn_pipeline(self):
        p = random_prob((6, 6), 3, seed=1)
        pipe = Pipeline([("denoise", HierarchicalDenoiser())])
        out = pipe.fit_transform(np.array(p.values))
        assert out.shape == (6, 6)


class TestEdgeGuidedSelector:
    def _setup(self):
        labels = np.zeros((48, 48), dtype=np.uint8)
        labels[12:36, 12:36] = 1
        labels[20:28, 20:28] = 2
        table = class_intensity_table(3)
        from segrefine import render_candidate
        from segrefine.grid import GridShape, LabelVolume

        cond = LabelVolume(labels, 3, GridShape((48, 48)))
        cands = [
            render_candidate(cond, RenderSpec(quality=q, class_intensities=table, seed=i))
            for i, q in enumerate([0.3, 0.95, 0.5])
        ]
        return cond, cands

    def test_predict_matches_select_best(self):
        cond, cands = self._setup()
        est = EdgeGuidedSelector().fit(np.array(cond.values))
        got = est.predict(cands)
        expected, scores = select_best(cands, cond, PipelineConfig())
        assert got == expected
        assert [s.score for s in est.scores_] == [s.score for s in scores]

    def test_unfitted_predict_raises(self):
        with pytest.raises(NotFittedError):
            EdgeGuidedSelector().predict([np.zeros((4, 4))])

    def test_params_surface(self):
        est = EdgeGuidedSelector(high=0.2, low=0.05, align_radius=1)
        assert clone(est).get_params()["high"] == 0.2


class TestSizeAwareFuser:
    def test_transform_matches_library_call(self):
        y_star = random_labels((8, 8), 4, seed=3)
        seg = random_labels((8, 8), 4, seed=4)
        est = SizeAwareFuser().fit(np.array(y_star.values))
        got = est.transform(np.array(seg.values))
        expected = fuse_or_bypass(y_star, seg)
        assert np.array_equal(got, expected.values)

    def test_unfitted_transform_raises(self):
        with pytest.raises(NotFittedError):
            SizeAwareFuser().transform(np.zeros((4, 4), dtype=np.uint8))

    def test_single_class_bypass(self):
        y = np.zeros((6, 6), dtype=np.uint8)
        y[2:4, 2:4] = 1
        seg = random_labels((6, 6), 2, seed=9)
        est = SizeAwareFuser().fit(y)
        assert np.array_equal(est.transform(np.array(seg.values)), seg.values)


class TestRefinementPipeline:
    def test_transform_matches_refine_volume(self):
        from segrefine import CorruptionSpec, GridShape, PhantomSpec, corrupt_probmap, make_phantom

        spec = PhantomSpec(GridShape((24, 24, 24)), 4, (9.0, 6.0, 3.0), seed=2)
        gt, _ = make_phantom(spec)
        p = corrupt_probmap(gt, CorruptionSpec(boundary_blur_sigma=1.0, flip_rate=0.1, seed=3))
        table = class_intensity_table(4)
        cand = SynthCandidateProvider(
            [RenderSpec(quality=q, class_intensities=table) for q in (0.9, 0.5)]
        )
        seg = ToySegProvider()
        est = RefinementPipeline(candidate_provider=cand, seg_provider=seg)
        got = est.transform(np.array(p.values))
        expected = refine_volume(p, ProviderConfig(cand, seg), None)
        assert np.array_equal(got, expected.labels.values)
        assert est.report_["selection"]["best_index"] == expected.best_index

    def test_missing_providers_raise(self):
        with pytest.raises(NotFittedError):
            RefinementPipeline().fit()
