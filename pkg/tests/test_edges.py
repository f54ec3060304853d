import numpy as np
import pytest

from layerkit.edges import CannyParams, canny, default_registry, file_backed_extractor, pick_extractor
from layerkit.errors import InvalidArgumentError
from layerkit.raster import save_png


def white_square_scene(size=256, square=100):
    img = np.zeros((size, size, 3))
    lo = (size - square) // 2
    img[lo : lo + square, lo : lo + square] = 1.0
    return img, lo, lo + square


class TestCanny:
    def test_uniform_image_no_edges(self):
        assert canny(np.full((64, 64, 3), 0.3)).sum() == 0.0

    def test_square_boundary_ring(self):
        img, lo, hi = white_square_scene()
        edges = canny(img)
        assert set(np.unique(edges)) <= {0.0, 1.0}
        ys, xs = np.nonzero(edges)
        # Every edge pixel sits within 2 px of the square boundary.
        dist_to_edges = np.minimum.reduce([
            np.abs(ys - (lo - 0.5)), np.abs(ys - (hi - 0.5)),
            np.abs(xs - (lo - 0.5)), np.abs(xs - (hi - 0.5)),
        ])
        boundary_band = np.zeros(ys.shape, dtype=bool)
        inside_y = (ys >= lo - 2) & (ys <= hi + 1)
        inside_x = (xs >= lo - 2) & (xs <= hi + 1)
        near_y = (np.abs(ys - lo) <= 2) | (np.abs(ys - (hi - 1)) <= 2)
        near_x = (np.abs(xs - lo) <= 2) | (np.abs(xs - (hi - 1)) <= 2)
        assert np.all((near_y & inside_x) | (near_x & inside_y))
        assert 360 <= len(ys) <= 520

    def test_raising_low_threshold_monotone(self):
        rng = np.random.default_rng(0)
        img = rng.random((96, 96, 3))
        prev = None
        for low in (0.05, 0.1, 0.2, 0.29):
            edges = canny(img, CannyParams(low=low, high=0.3))
            if prev is not None:
                assert ((edges == 1) | (prev == 0)).all() or (edges <= prev).all()
                assert (edges <= prev).all()
            prev = edges

    def test_rotation_consistency(self):
        # Agreement within a 1-px boundary band: an edge pixel counts as a
        # disagreement only when the other map has no edge within 1 px.
        from scipy.ndimage import binary_dilation

        rng = np.random.default_rng(1)
        base = rng.random((8, 8, 3))
        img = np.kron(base, np.ones((16, 16, 1)))  # blocky structure, 128x128
        e1 = np.rot90(canny(img)).astype(bool)
        e2 = canny(np.ascontiguousarray(np.rot90(img))).astype(bool)
        near1 = binary_dilation(e1, structure=np.ones((3, 3), dtype=bool))
        near2 = binary_dilation(e2, structure=np.ones((3, 3), dtype=bool))
        disagreement = ((e1 & ~near2) | (e2 & ~near1)).mean()
        assert disagreement < 0.02

    def test_param_validation(self):
        with pytest.raises(InvalidArgumentError):
            CannyParams(sigma=0.0)
        with pytest.raises(InvalidArgumentError):
            CannyParams(low=0.5, high=0.3)

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        img = rng.random((64, 64, 3))
        np.testing.assert_array_equal(canny(img), canny(img))


class TestRegistry:
    def test_single_extractor_always_chosen(self):
        registry = default_registry()
        rng = np.random.default_rng(3)
        for _ in range(10):
            name, _fn = pick_extractor(registry, rng)
            assert name == "canny"

    def test_two_extractors_uniform(self, tmp_path):
        registry = default_registry({"external": tmp_path})
        rng = np.random.default_rng(4)
        counts = {"canny": 0, "external": 0}
        n = 10_000
        for _ in range(n):
            name, _fn = pick_extractor(registry, rng)
            counts[name] += 1
        for name in counts:
            assert abs(counts[name] / n - 0.5) < 0.02

    def test_file_backed_passthrough(self, tmp_path):
        edge = (np.random.default_rng(5).random((32, 32)) > 0.5).astype(np.float64)
        save_png(edge, tmp_path / "scene.png")
        fn = file_backed_extractor(tmp_path)
        got = fn(np.zeros((32, 32, 3)), tmp_path / "scene.png")
        np.testing.assert_array_equal(got, edge)

    def test_empty_registry_rejected(self):
        from layerkit.edges import ExtractorRegistry

        with pytest.raises(InvalidArgumentError):
            ExtractorRegistry().pick(np.random.default_rng(6))
