import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layerkit.errors import InvalidArgumentError
from layerkit.metrics import evaluate_batch, l1, l2, psnr, ssim


def scalar_loop_l1_l2(a, b):
    total_abs = 0.0
    total_sq = 0.0
    count = 0
    for x, y in zip(a.ravel(), b.ravel()):
        total_abs += abs(x - y)
        total_sq += (x - y) ** 2
        count += 1
    return total_abs / count, total_sq / count


class TestL1L2:
    def test_identical(self):
        a = np.random.default_rng(0).random((8, 8, 3))
        assert l1(a, a) == 0.0
        assert l2(a, a) == 0.0

    def test_constant_difference(self):
        a = np.full((4, 4), 0.5)
        b = np.full((4, 4), 0.6)
        assert l1(a, b) == pytest.approx(0.1)
        assert l2(a, b) == pytest.approx(0.01)

    def test_matches_scalar_loop(self):
        rng = np.random.default_rng(1)
        a, b = rng.random((6, 5, 3)), rng.random((6, 5, 3))
        want_l1, want_l2 = scalar_loop_l1_l2(a, b)
        assert l1(a, b) == pytest.approx(want_l1, abs=1e-12)
        assert l2(a, b) == pytest.approx(want_l2, abs=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            l1(np.zeros((2, 2)), np.zeros((3, 3)))


class TestPSNR:
    def test_mse_001_is_20db(self):
        a = np.zeros((10, 10))
        b = np.full((10, 10), 0.1)
        assert psnr(a, b) == pytest.approx(20.0)

    def test_identical_is_inf(self):
        a = np.random.default_rng(2).random((5, 5))
        assert math.isinf(psnr(a, a))

    def test_mse_00001_is_40db(self):
        a = np.zeros((10, 10))
        b = np.full((10, 10), 0.01)
        assert psnr(a, b) == pytest.approx(40.0)


class TestSSIM:
    def test_self_similarity_is_one(self):
        a = np.random.default_rng(3).random((16, 16))
        assert ssim(a, a) == pytest.approx(1.0)

    def test_inverted_mid_contrast_is_low(self):
        # Mid-contrast gradient vs its negative: structure inverts, so the
        # score must drop below 0.2 (usually negative).
        y = np.linspace(0.2, 0.8, 32)
        a = np.tile(y[:, None], (1, 32))
        assert ssim(a, 1.0 - a) < 0.2

    def test_brightness_offset_preserves_structure(self):
        y = np.linspace(0.1, 0.7, 32)
        a = np.tile(y[:, None], (1, 32))
        assert ssim(a, np.clip(a + 0.1, 0, 1)) > 0.8

    def test_too_small_rejected(self):
        with pytest.raises(InvalidArgumentError):
            ssim(np.zeros((8, 8)), np.zeros((8, 8)))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_symmetry(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.random((12, 12, 3)), rng.random((12, 12, 3))
    assert l1(a, b) == l1(b, a)
    assert l2(a, b) == l2(b, a)
    assert psnr(a, b) == psnr(b, a)
    assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)


def test_l2_equals_l1_squared_only_for_constant_difference():
    a = np.zeros((4, 4))
    b = np.full((4, 4), 0.3)
    assert l2(a, b) == pytest.approx(l1(a, b) ** 2)
    rng = np.random.default_rng(4)
    x, y = rng.random((4, 4)), rng.random((4, 4))
    assert l2(x, y) != pytest.approx(l1(x, y) ** 2)


def test_batch_report():
    rng = np.random.default_rng(5)
    pairs = [(rng.random((12, 12)), rng.random((12, 12))) for _ in range(3)]
    report = evaluate_batch(pairs)
    assert report.image_count == 3
    assert report.l1 == pytest.approx(np.mean([l1(p, r) for p, r in pairs]))
