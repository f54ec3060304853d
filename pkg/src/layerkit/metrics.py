"""Pixel-space evaluation metrics: L1, L2 (MSE), PSNR, SSIM.

All metrics take float rasters in [0, 1] (RGB or grayscale) and treat the
dynamic range as 1.0.  Identical inputs give PSNR = inf (returned as
math.inf, serialized as the string "inf" in reports).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np
from scipy.ndimage import convolve1d

from .errors import InvalidArgumentError
from .raster import to_gray

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


@dataclass
class MetricReport:
    l1: float
    l2: float
    psnr: float
    ssim: float
    image_count: int

    def to_dict(self) -> dict:
        out = asdict(self)
        if math.isinf(out["psnr"]):
            out["psnr"] = "inf"
        return out


def _check_pair(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def l1(a: np.ndarray, b: np.ndarray) -> float:
    """Mean absolute difference over all pixels and channels."""
    a, b = _check_pair(a, b)
    return float(np.abs(a - b).mean())


def l2(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared difference over all pixels and channels."""
    a, b = _check_pair(a, b)
    return float(((a - b) ** 2).mean())


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10 log10(1 / MSE) dB with peak 1.0; inf for identical images."""
    mse = l2(a, b)
    if mse == 0.0:
        return math.inf
    return float(10.0 * np.log10(1.0 / mse))


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    half = (size - 1) / 2.0
    xs = np.arange(size, dtype=np.float64) - half
    k = np.exp(-(xs**2) / (2.0 * sigma**2))
    return k / k.sum()


def _window_filter(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable Gaussian filter, then crop to the valid region."""
    half = len(kernel) // 2
    out = convolve1d(img, kernel, axis=0, mode="reflect")
    out = convolve1d(out, kernel, axis=1, mode="reflect")
    return out[half:-half, half:-half]


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean structural similarity with the canonical 11x11 / sigma 1.5 window.

    RGB inputs are converted to grayscale first; images must be at least
    as large as the window.
    """
    a, b = _check_pair(a, b)
    ga, gb = to_gray(a), to_gray(b)
    if min(ga.shape) < SSIM_WINDOW:
        raise InvalidArgumentError(f"images must be at least {SSIM_WINDOW}x{SSIM_WINDOW}")
    kernel = _gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA)
    c1 = (SSIM_K1 * 1.0) ** 2
    c2 = (SSIM_K2 * 1.0) ** 2
    mu_a = _window_filter(ga, kernel)
    mu_b = _window_filter(gb, kernel)
    var_a = _window_filter(ga * ga, kernel) - mu_a**2
    var_b = _window_filter(gb * gb, kernel) - mu_b**2
    cov = _window_filter(ga * gb, kernel) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float((num / den).mean())


def evaluate_pair(pred: np.ndarray, ref: np.ndarray) -> MetricReport:
    return MetricReport(l1(pred, ref), l2(pred, ref), psnr(pred, ref), ssim(pred, ref), 1)


def evaluate_batch(pairs: list[tuple[np.ndarray, np.ndarray]]) -> MetricReport:
    """Mean metrics over (pred, ref) pairs; PSNR averages finite values only
    and stays inf when every pair is identical."""
    if not pairs:
        raise InvalidArgumentError("no image pairs to evaluate")
    reports = [evaluate_pair(p, r) for p, r in pairs]
    psnrs = [r.psnr for r in reports if math.isfinite(r.psnr)]
    return MetricReport(
        l1=float(np.mean([r.l1 for r in reports])),
        l2=float(np.mean([r.l2 for r in reports])),
        psnr=float(np.mean(psnrs)) if psnrs else math.inf,
        ssim=float(np.mean([r.ssim for r in reports])),
        image_count=len(reports),
    )
