"""sRGB <-> CIELAB conversion and perceptual difference maps (D65, 2 deg)."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError

# sRGB linear -> XYZ (D65)
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)
_WHITE = np.array([0.95047, 1.0, 1.08883])
_EPS = (6.0 / 29.0) ** 3
_KAPPA = 3.0 * (6.0 / 29.0) ** 2


def _srgb_to_linear(c: np.ndarray) -> np.ndarray:
    return np.where(c > 0.04045, ((c + 0.055) / 1.055) ** 2.4, c / 12.92)


def _linear_to_srgb(c: np.ndarray) -> np.ndarray:
    c = np.clip(c, 0.0, None)
    return np.where(c > 0.0031308, 1.055 * c ** (1.0 / 2.4) - 0.055, 12.92 * c)


def _f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _EPS, np.cbrt(t), t / _KAPPA + 4.0 / 29.0)


def _f_inv(u: np.ndarray) -> np.ndarray:
    return np.where(u > 6.0 / 29.0, u**3, _KAPPA * (u - 4.0 / 29.0))


def srgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    """sRGB in [0, 1] to (L*, a*, b*); works on a pixel or an (..., 3) raster."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.shape[-1] != 3:
        raise InvalidArgumentError("last axis must hold RGB")
    if rgb.min() < 0 or rgb.max() > 1:
        raise InvalidArgumentError("components must lie in [0, 1]")
    xyz = _srgb_to_linear(rgb) @ _RGB_TO_XYZ.T
    fxyz = _f(xyz / _WHITE)
    lab = np.empty_like(rgb)
    lab[..., 0] = 116.0 * fxyz[..., 1] - 16.0
    lab[..., 1] = 500.0 * (fxyz[..., 0] - fxyz[..., 1])
    lab[..., 2] = 200.0 * (fxyz[..., 1] - fxyz[..., 2])
    return lab


def lab_to_srgb(lab: np.ndarray) -> np.ndarray:
    """Inverse conversion, clipped to the sRGB gamut."""
    lab = np.asarray(lab, dtype=np.float64)
    fy = (lab[..., 0] + 16.0) / 116.0
    fx = fy + lab[..., 1] / 500.0
    fz = fy - lab[..., 2] / 200.0
    xyz = np.stack([_f_inv(fx), _f_inv(fy), _f_inv(fz)], axis=-1) * _WHITE
    return np.clip(_linear_to_srgb(xyz @ _XYZ_TO_RGB.T), 0.0, 1.0)


def lab_distance_map(src: np.ndarray, edited: np.ndarray) -> np.ndarray:
    """Per-pixel Euclidean distance between Lab vectors of two RGB rasters."""
    src = np.asarray(src, dtype=np.float64)
    edited = np.asarray(edited, dtype=np.float64)
    if src.shape != edited.shape:
        raise InvalidArgumentError(f"shape mismatch: {src.shape} vs {edited.shape}")
    diff = srgb_to_lab(src) - srgb_to_lab(edited)
    return np.sqrt((diff**2).sum(axis=-1))
