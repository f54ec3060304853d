"""Change-mask derivation: Lab conversion, convex hull, smoothing, removal pairs."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.ndimage import binary_erosion

from layerkit.errors import InvalidArgumentError
from layerkit.maskgen import (
    ChangeMask,
    MaskRejection,
    brute_force_hull,
    convex_hull,
    derive_mask,
    derive_mask_multi,
    fill_convex_polygon,
    lab_distance_map,
    lab_to_srgb,
    srgb_to_lab,
    synthesize_removal_pair,
)
from layerkit.raster import disc_element


def srgb_to_lab_scalar(r, g, b):
    """Independent scalar conversion used as the golden-value oracle."""

    def lin(u):
        return ((u + 0.055) / 1.055) ** 2.4 if u > 0.04045 else u / 12.92

    def f(t):
        eps = (6 / 29) ** 3
        return t ** (1 / 3) if t > eps else t / (3 * (6 / 29) ** 2) + 4 / 29

    rl, gl, bl = lin(r), lin(g), lin(b)
    x = 0.4124564 * rl + 0.3575761 * gl + 0.1804375 * bl
    y = 0.2126729 * rl + 0.7151522 * gl + 0.0721750 * bl
    z = 0.0193339 * rl + 0.1191920 * gl + 0.9503041 * bl
    fx, fy, fz = f(x / 0.95047), f(y / 1.0), f(z / 1.08883)
    return 116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)


class TestLab:
    def test_white_point(self):
        lab = srgb_to_lab(np.array([1.0, 1.0, 1.0]))
        assert lab[0] == pytest.approx(100.0, abs=1e-4)
        assert abs(lab[1]) < 0.01 and abs(lab[2]) < 0.01

    def test_black(self):
        np.testing.assert_allclose(srgb_to_lab(np.zeros(3)), np.zeros(3), atol=1e-12)

    def test_mid_gray_golden(self):
        # Pinned from the scalar oracle above.
        lab = srgb_to_lab(np.array([0.5, 0.5, 0.5]))
        assert lab[0] == pytest.approx(53.38896705407973, abs=1e-9)
        assert abs(lab[1]) < 1e-4 and abs(lab[2]) < 1e-4
        want = srgb_to_lab_scalar(0.5, 0.5, 0.5)
        np.testing.assert_allclose(lab, want, atol=1e-9)

    def test_matches_scalar_oracle_on_random_pixels(self):
        rng = np.random.default_rng(0)
        pix = rng.random((32, 3))
        got = srgb_to_lab(pix)
        for row, (r, g, b) in zip(got, pix):
            np.testing.assert_allclose(row, srgb_to_lab_scalar(r, g, b), atol=1e-9)

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        rgb = rng.random((64, 3))
        back = lab_to_srgb(srgb_to_lab(rgb))
        np.testing.assert_allclose(back, rgb, atol=1e-6)

    def test_distance_identical_is_zero(self):
        img = np.random.default_rng(2).random((8, 8, 3))
        assert lab_distance_map(img, img).max() == 0.0

    def test_black_vs_white_is_100(self):
        black = np.zeros((4, 4, 3))
        white = np.ones((4, 4, 3))
        np.testing.assert_allclose(lab_distance_map(black, white), 100.0, atol=1e-3)

    def test_matches_pointwise_recompute(self):
        rng = np.random.default_rng(3)
        a, b = rng.random((6, 6, 3)), rng.random((6, 6, 3))
        got = lab_distance_map(a, b)
        for i in range(6):
            for j in range(6):
                la = np.array(srgb_to_lab_scalar(*a[i, j]))
                lb = np.array(srgb_to_lab_scalar(*b[i, j]))
                assert got[i, j] == pytest.approx(np.linalg.norm(la - lb), abs=1e-9)


class TestConvexHull:
    def test_triangle(self):
        pts = [(0, 0), (4, 0), (2, 3)]
        hull = convex_hull(pts)
        assert hull.shape == (3, 3 - 1 + 0) or hull.shape == (3, 2)
        assert {tuple(p) for p in hull} == {(0.0, 0.0), (4.0, 0.0), (2.0, 3.0)}

    def test_square_with_interior_points(self):
        pts = [(0, 0), (1, 0), (1, 1), (0, 1), (0.5, 0.5), (0.25, 0.75), (0.5, 0.0)]
        hull = convex_hull(pts)
        assert {tuple(p) for p in hull} == {(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)}

    def test_ccw_orientation(self):
        rng = np.random.default_rng(4)
        pts = rng.random((50, 2))
        hull = convex_hull(pts)
        area2 = 0.0
        for i in range(len(hull)):
            x0, y0 = hull[i]
            x1, y1 = hull[(i + 1) % len(hull)]
            area2 += x0 * y1 - x1 * y0
        assert area2 > 0

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(5)
        pts = rng.random((1000, 2)) * 100
        got = convex_hull(pts)
        want = brute_force_hull(pts)
        lead = int(np.lexsort((got[:, 1], got[:, 0]))[0])
        got_rot = np.roll(got, -lead, axis=0)
        np.testing.assert_allclose(got_rot, want, atol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6))
    def test_permutation_invariant(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.random((40, 2))
        hull_a = convex_hull(pts)
        hull_b = convex_hull(pts[rng.permutation(40)])
        assert {tuple(p) for p in hull_a} == {tuple(p) for p in hull_b}

    def test_degenerate_point_and_segment(self):
        assert convex_hull([(2.0, 3.0)]).shape == (1, 2)
        seg = convex_hull([(0, 0), (1, 1), (2, 2)])
        assert {tuple(p) for p in seg} == {(0.0, 0.0), (2.0, 2.0)}


class TestDeriveMask:
    def make_pair(self, box=(100, 100, 164, 164), size=512):
        rng = np.random.default_rng(6)
        src = np.clip(rng.normal(0.5, 0.05, size=(size, size, 3)), 0, 1)
        edited = src.copy()
        y0, x0, y1, x1 = box
        edited[y0:y1, x0:x1] = 1.0 - edited[y0:y1, x0:x1]
        return src, edited, (y0, x0, y1, x1)

    def test_identical_pair_rejected(self):
        img = np.random.default_rng(7).random((64, 64, 3))
        result = derive_mask(img, img)
        assert isinstance(result, MaskRejection)
        assert result.reason == "no-change"

    def test_changed_square_accepted(self):
        src, edited, (y0, x0, y1, x1) = self.make_pair()
        result = derive_mask(src, edited)
        assert isinstance(result, ChangeMask)
        square = np.zeros((512, 512), dtype=bool)
        square[y0:y1, x0:x1] = True
        inter = (result.mask & square).sum()
        union = (result.mask | square).sum()
        assert inter / union >= 0.9
        assert result.hull_area_ratio == pytest.approx(4096 / 262144, rel=0.2)

    def test_global_edit_rejected_too_large(self):
        rng = np.random.default_rng(8)
        src = np.clip(rng.normal(0.5, 0.05, size=(128, 128, 3)), 0, 1)
        edited = 1.0 - src  # ~100% changed
        result = derive_mask(src, edited)
        assert isinstance(result, MaskRejection)
        assert result.reason == "too-large"

    def test_tiny_change_rejected_too_small(self):
        src = np.full((256, 256, 3), 0.5)
        edited = src.copy()
        edited[10, 10] = 1.0
        result = derive_mask(src, edited, radius=4)
        assert isinstance(result, MaskRejection)
        assert result.reason == "too-small"

    def test_suprathreshold_pixels_inside_hull_before_smoothing(self):
        src, edited, _ = self.make_pair(box=(50, 80, 120, 200), size=256)
        threshold = 6.0
        delta = lab_distance_map(src, edited)
        ys, xs = np.nonzero(delta > threshold)
        hull = convex_hull(np.stack([xs, ys], axis=1))
        filled = fill_convex_polygon(hull, 256, 256)
        assert filled[ys, xs].all()

    def test_smoothing_keeps_eroded_hull(self):
        src, edited, _ = self.make_pair(box=(50, 80, 150, 230), size=256)
        radius = 5
        result = derive_mask(src, edited, radius=radius)
        assert isinstance(result, ChangeMask)
        delta = lab_distance_map(src, edited)
        ys, xs = np.nonzero(delta > 6.0)
        hull = convex_hull(np.stack([xs, ys], axis=1))
        filled = fill_convex_polygon(hull, 256, 256)
        eroded = binary_erosion(filled, structure=disc_element(radius))
        assert (result.mask | ~eroded).all()

    def test_lower_threshold_never_shrinks_detection(self):
        src, edited, _ = self.make_pair(box=(40, 40, 90, 90), size=128)
        delta = lab_distance_map(src, edited)
        low = delta > 3.0
        high = delta > 9.0
        assert (low | ~high).all()

    def test_multi_threshold_prescreen(self):
        src, edited, _ = self.make_pair(box=(40, 40, 90, 90), size=128)
        result = derive_mask_multi(src, edited)
        assert isinstance(result, ChangeMask)
        img = np.random.default_rng(9).random((64, 64, 3))
        rej = derive_mask_multi(img, img)
        assert isinstance(rej, MaskRejection)


class TestRemovalPair:
    def make_scene(self, size=96):
        rng = np.random.default_rng(10)
        img = rng.random((size, size, 3))
        mask = np.zeros((size, size), dtype=bool)
        mask[30:50, 20:44] = True
        return img, mask

    def test_offset_forced_to_original(self):
        img, mask = self.make_scene()
        pair = synthesize_removal_pair(img, mask, np.random.default_rng(0), offset=(30, 20))
        np.testing.assert_array_equal(pair.input_image, pair.target_image)
        assert pair.mask[mask].all()

    def test_difference_confined_to_footprint(self):
        img, mask = self.make_scene()
        pair = synthesize_removal_pair(img, mask, np.random.default_rng(1))
        diff = np.abs(pair.input_image - pair.target_image).sum(axis=-1) > 0
        assert (~diff | pair.mask).all()

    def test_paste_always_in_bounds(self):
        img, mask = self.make_scene()
        for seed in range(100):
            pair = synthesize_removal_pair(img, mask, np.random.default_rng(seed))
            dy, dx = pair.offset
            assert 0 <= dy <= img.shape[0] - 20 and 0 <= dx <= img.shape[1] - 24

    def test_rejects_empty_and_full_masks(self):
        img, _ = self.make_scene()
        with pytest.raises(InvalidArgumentError):
            synthesize_removal_pair(img, np.zeros(img.shape[:2], dtype=bool), np.random.default_rng(2))
        with pytest.raises(InvalidArgumentError):
            synthesize_removal_pair(img, np.ones(img.shape[:2], dtype=bool), np.random.default_rng(3))
