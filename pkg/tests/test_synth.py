import numpy as np
import pytest

from segrefine import (
    CorruptionSpec,
    GridShape,
    PhantomSpec,
    RenderSpec,
    argmax_labels,
    canny,
    consistency_score,
    corrupt_probmap,
    dice,
    label_edge_map,
    make_phantom,
    render_candidate,
    toy_segment,
)
from segrefine.errors import BadSpecError
from segrefine.synth import child_rng, child_seed, class_intensity_table

TABLE4 = class_intensity_table(4)


def _phantom2d(seed=7):
    spec = PhantomSpec(
        GridShape((64, 64)), 4, ((24.0, 24.0), (16.0, 16.0), (8.0, 8.0)), seed=seed
    )
    return make_phantom(spec)


class TestPhantom:
    def test_zero_radius_rejected(self):
        with pytest.raises(BadSpecError):
            PhantomSpec(GridShape((16, 16)), 2, ((0.0, 0.0),), seed=0)

    def test_nondecreasing_radii_rejected(self):
        with pytest.raises(BadSpecError):
            PhantomSpec(GridShape((32, 32)), 3, ((8.0, 8.0), (8.0, 8.0)), seed=0)

    def test_oversized_ellipsoid_rejected(self):
        with pytest.raises(BadSpecError):
            PhantomSpec(GridShape((16, 16)), 2, ((20.0, 20.0),), seed=0)

    def test_wrong_level_count_rejected(self):
        with pytest.raises(BadSpecError):
            PhantomSpec(GridShape((32, 32)), 4, ((10.0, 10.0),), seed=0)

    def test_class_counts_strictly_decreasing(self):
        spec = PhantomSpec(GridShape((32, 32, 32)), 4, (12.0, 8.0, 4.0), seed=0)
        gt, image = make_phantom(spec)
        counts = np.bincount(gt.values.ravel(), minlength=4)
        assert counts[1] > counts[2] > counts[3] > 0

    def test_clean_image_is_intensity_lookup(self):
        gt, image = _phantom2d()
        table = np.asarray(TABLE4)
        assert np.array_equal(image, table[gt.values])

    def test_deterministic_in_seed(self):
        a_gt, a_img = _phantom2d(seed=42)
        b_gt, b_img = _phantom2d(seed=42)
        assert np.array_equal(a_gt.values, b_gt.values)
        assert np.array_equal(a_img, b_img)
        c_gt, _ = _phantom2d(seed=43)
        assert not np.array_equal(a_gt.values, c_gt.values)


class TestCorruptProbmap:
    def test_identity_corruption(self):
        gt, _ = _phantom2d()
        p = corrupt_probmap(gt, CorruptionSpec(seed=3))
        assert np.array_equal(argmax_labels(p).values, gt.values)

    def test_flip_rate_band_over_20_seeds(self):
        spec = PhantomSpec(GridShape((32, 32, 32)), 4, (12.0, 8.0, 4.0), seed=0)
        gt, _ = make_phantom(spec)
        for seed in range(20):
            p = corrupt_probmap(gt, CorruptionSpec(flip_rate=0.1, seed=seed))
            rate = float((argmax_labels(p).values != gt.values).mean())
            assert 0.05 <= rate <= 0.15

    def test_deterministic(self):
        gt, _ = _phantom2d()
        spec = CorruptionSpec(boundary_blur_sigma=1.0, logit_noise_std=0.3, flip_rate=0.1, seed=9)
        a = corrupt_probmap(gt, spec)
        b = corrupt_probmap(gt, spec)
        assert np.array_equal(a.values, b.values)

    def test_error_rate_monotone_in_flip_rate(self):
        gt, _ = _phantom2d()
        rates = []
        for fr in (0.0, 0.05, 0.1, 0.2, 0.4):
            errs = []
            for seed in range(5):
                p = corrupt_probmap(gt, CorruptionSpec(flip_rate=fr, seed=seed))
                errs.append(float((argmax_labels(p).values != gt.values).mean()))
            rates.append(np.mean(errs))
        assert all(a <= b + 1e-12 for a, b in zip(rates, rates[1:]))

    def test_invalid_specs(self):
        with pytest.raises(BadSpecError):
            CorruptionSpec(flip_rate=0.6)
        with pytest.raises(BadSpecError):
            CorruptionSpec(boundary_blur_sigma=-1.0)


class TestRenderCandidate:
    def test_perfect_quality_is_exact_render(self):
        gt, image = _phantom2d()
        r = render_candidate(gt, RenderSpec(quality=1.0, class_intensities=TABLE4, seed=5))
        assert np.array_equal(r, image)

    def test_perfect_render_edges_cover_condition(self):
        gt, _ = _phantom2d()
        r = render_candidate(gt, RenderSpec(quality=1.0, class_intensities=TABLE4, seed=5))
        s = consistency_score(canny(r), label_edge_map(gt), align_radius=1)
        assert s.score == 1.0

    def test_quality_orders_consistency(self):
        gt, _ = _phantom2d()
        cond = label_edge_map(gt)
        wins = 0
        for seed in range(100):
            good = render_candidate(
                gt,
                RenderSpec(quality=1.0, class_intensities=TABLE4, seed=child_seed(seed, 0)),
            )
            bad = render_candidate(
                gt,
                RenderSpec(quality=0.0, class_intensities=TABLE4, seed=child_seed(seed, 1)),
            )
            s_good = consistency_score(canny(good), cond).score
            s_bad = consistency_score(canny(bad), cond).score
            wins += s_good > s_bad
        assert wins >= 95

    def test_deterministic(self):
        gt, _ = _phantom2d()
        spec = RenderSpec(quality=0.4, class_intensities=TABLE4, seed=17)
        assert np.array_equal(render_candidate(gt, spec), render_candidate(gt, spec))

    def test_intensity_gap_validated(self):
        with pytest.raises(BadSpecError):
            RenderSpec(quality=0.5, class_intensities=(0.0, 0.1))
        with pytest.raises(BadSpecError):
            RenderSpec(quality=1.5, class_intensities=(0.0, 1.0))

    def test_table_must_match_classes(self):
        gt, _ = _phantom2d()
        with pytest.raises(BadSpecError):
            render_candidate(gt, RenderSpec(quality=1.0, class_intensities=(0.0, 1.0)))


class TestToySegment:
    def test_inverts_clean_render(self):
        gt, _ = _phantom2d()
        r = render_candidate(gt, RenderSpec(quality=1.0, class_intensities=TABLE4, seed=1))
        seg = toy_segment(r, TABLE4)
        assert np.array_equal(seg.values, gt.values)

    def test_midway_intensity_goes_to_lower_class(self):
        table = (0.0, 0.5, 1.0)
        img = np.full((2, 2), 0.25)
        seg = toy_segment(img, table)
        assert np.all(seg.values == 0)

    def test_noisy_render_dice_over_20_seeds(self):
        gt, _ = _phantom2d()
        for seed in range(20):
            r = render_candidate(
                gt, RenderSpec(quality=0.5, class_intensities=TABLE4, seed=seed)
            )
            seg = toy_segment(r, TABLE4)
            for cls in (1, 2, 3):
                assert dice(seg, gt, cls) >= 0.8

    def test_duplicate_intensities_rejected(self):
        with pytest.raises(BadSpecError):
            toy_segment(np.zeros((4, 4)), (0.5, 0.5))


class TestSeeding:
    def test_child_streams_differ_and_reproduce(self):
        a = child_rng(7, 0).random(4)
        b = child_rng(7, 1).random(4)
        a2 = child_rng(7, 0).random(4)
        assert not np.array_equal(a, b)
        assert np.array_equal(a, a2)

    def test_child_seed_is_stable(self):
        assert child_seed(7, 3) == child_seed(7, 3)
        assert child_seed(7, 3) != child_seed(7, 4)
        assert child_seed(-1, 0) == child_seed(-1, 0)  # negative seeds normalized
