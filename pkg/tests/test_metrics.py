import numpy as np
import pytest

from segrefine import GridShape, LabelVolume, asd, dice, evaluate, surface_points
from segrefine.errors import EmptySurfaceError, ShapeMismatchError

from conftest import random_labels


def _binary(mask, shape):
    return LabelVolume(np.asarray(mask, dtype=np.uint8), 2, GridShape(shape))


def brute_force_asd(pred_pts, gt_pts):
    """All-pairs nearest distances, no spatial index."""
    d_pg = [min(np.sqrt(((p - q) ** 2).sum()) for q in gt_pts) for p in pred_pts]
    d_gp = [min(np.sqrt(((q - p) ** 2).sum()) for p in pred_pts) for q in gt_pts]
    return (np.mean(d_pg) + np.mean(d_gp)) / 2.0


class TestDice:
    def test_perfect_agreement(self):
        y = random_labels((6, 6), 3, seed=0)
        for cls in (1, 2):
            assert dice(y, y, cls) == 1.0

    def test_disjoint_masks(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        b = np.zeros((4, 4), dtype=np.uint8)
        a[0, 0] = 1
        b[3, 3] = 1
        assert dice(_binary(a, (4, 4)), _binary(b, (4, 4)), 1) == 0.0

    def test_half_overlap(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        b = np.zeros((4, 4), dtype=np.uint8)
        a.reshape(-1)[:8] = 1
        b.reshape(-1)[4:12] = 1  # |A|=|B|=8, |A n B|=4
        assert dice(_binary(a, (4, 4)), _binary(b, (4, 4)), 1) == 0.5

    def test_both_empty_is_one(self):
        z = _binary(np.zeros((3, 3)), (3, 3))
        assert dice(z, z, 1) == 1.0

    def test_symmetry(self):
        a = random_labels((6, 6, 6), 3, seed=1)
        b = random_labels((6, 6, 6), 3, seed=2)
        for cls in (1, 2):
            assert dice(a, b, cls) == dice(b, a, cls)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            dice(random_labels((4, 4), 2, 0), random_labels((5, 5), 2, 0), 1)


class TestSurfacePoints:
    def test_single_voxel_is_its_own_surface(self):
        m = np.zeros((5, 5, 5), dtype=bool)
        m[2, 3, 1] = True
        pts = surface_points(m, (1.0, 1.0, 1.0))
        assert pts.shape == (1, 3)
        assert pts[0].tolist() == [2.0, 3.0, 1.0]

    def test_cube_shell_count(self):
        m = np.zeros((8, 8, 8), dtype=bool)
        m[2:6, 2:6, 2:6] = True  # 4^3 cube; shell = 4^3 - 2^3 = 56
        assert len(surface_points(m, (1.0, 1.0, 1.0))) == 56

    def test_volume_border_voxels_are_surface(self):
        m = np.ones((3, 3), dtype=bool)  # everything touches the border except center
        pts = surface_points(m, (1.0, 1.0))
        assert len(pts) == 8

    def test_empty_mask(self):
        assert len(surface_points(np.zeros((4, 4), dtype=bool), (1.0, 1.0))) == 0

    def test_spacing_scales_coordinates(self):
        m = np.zeros((4, 4), dtype=bool)
        m[1, 2] = True
        pts = surface_points(m, (2.0, 0.5))
        assert pts[0].tolist() == [2.0, 1.0]


class TestAsd:
    def test_identical_masks_zero(self):
        y = random_labels((8, 8, 8), 3, seed=3)
        assert asd(y, y, 1) == 0.0

    def test_two_points_three_apart(self):
        a = np.zeros((8, 8), dtype=np.uint8)
        b = np.zeros((8, 8), dtype=np.uint8)
        a[2, 2] = 1
        b[2, 5] = 1
        assert asd(_binary(a, (8, 8)), _binary(b, (8, 8)), 1) == 3.0

    def test_shifted_squares_match_brute_force(self):
        a = np.zeros((16, 16), dtype=np.uint8)
        b = np.zeros((16, 16), dtype=np.uint8)
        a[4:12, 4:12] = 1
        b[6:14, 4:12] = 1  # shift 2 along the first axis
        pa, pb = _binary(a, (16, 16)), _binary(b, (16, 16))
        got = asd(pa, pb, 1)
        expected = brute_force_asd(
            surface_points(a == 1, (1.0, 1.0)), surface_points(b == 1, (1.0, 1.0))
        )
        assert got == pytest.approx(expected, abs=1e-6)

    def test_empty_surface_is_an_error(self):
        a = np.zeros((4, 4), dtype=np.uint8)
        b = np.zeros((4, 4), dtype=np.uint8)
        a[1, 1] = 1
        with pytest.raises(EmptySurfaceError):
            asd(_binary(a, (4, 4)), _binary(b, (4, 4)), 1)

    def test_symmetric_in_arguments(self):
        a = random_labels((8, 8), 2, seed=8)
        b = random_labels((8, 8), 2, seed=9)
        assert asd(a, b, 1) == pytest.approx(asd(b, a, 1), abs=1e-12)

    def test_spacing_linearity(self):
        a = random_labels((8, 8, 8), 2, seed=10)
        b = random_labels((8, 8, 8), 2, seed=11)
        base = asd(a, b, 1, (1.0, 1.0, 1.0))
        scaled = asd(a, b, 1, (2.5, 2.5, 2.5))
        assert scaled == pytest.approx(2.5 * base, rel=1e-9)

    def test_axis_permutation_invariance(self):
        a = random_labels((6, 7, 8), 2, seed=12)
        b = random_labels((6, 7, 8), 2, seed=13)
        sp = (1.0, 2.0, 3.0)
        base = asd(a, b, 1, sp)
        perm = (2, 0, 1)
        ap = LabelVolume(np.transpose(a.values, perm), 2, GridShape((8, 6, 7)))
        bp = LabelVolume(np.transpose(b.values, perm), 2, GridShape((8, 6, 7)))
        assert asd(ap, bp, 1, (3.0, 1.0, 2.0)) == pytest.approx(base, rel=1e-12)


class TestEvaluate:
    def test_perfect_prediction(self):
        y = random_labels((8, 8, 8), 4, seed=20)
        rep = evaluate(y, y)
        for cls, m in rep.per_class.items():
            assert m.dice == 1.0
            assert m.asd == 0.0 or m.asd is None
        assert rep.mean_dice == 1.0

    def test_absent_class_dice_one_asd_skipped(self):
        g = GridShape((4, 4))
        a = np.zeros((4, 4), dtype=np.uint8)
        a[0, 0] = 1
        pred = LabelVolume(a, 3, g)  # class 2 absent from both
        rep = evaluate(pred, pred)
        assert rep.per_class[2].dice == 1.0
        assert rep.per_class[2].asd is None
        assert rep.asd_skipped == (2,)
        assert rep.mean_asd == 0.0  # only class 1 counted

    def test_composes_single_class_calls(self):
        pred = random_labels((8, 8, 8), 4, seed=30)
        gt = random_labels((8, 8, 8), 4, seed=31)
        rep = evaluate(pred, gt)
        for cls in (1, 2, 3):
            assert rep.per_class[cls].dice == dice(pred, gt, cls)
            assert rep.per_class[cls].asd == pytest.approx(asd(pred, gt, cls), abs=1e-12)

    def test_report_serializes(self):
        pred = random_labels((6, 6), 3, seed=1)
        rep = evaluate(pred, pred).to_dict()
        assert set(rep) == {"per_class", "mean_dice", "mean_asd", "asd_skipped"}
