"""Raster utilities shared by the compositing and data pipelines.

All in-memory rasters are float64 numpy arrays with values in [0, 1]:
RGB images are (H, W, 3), masks and edge maps are (H, W).  PNG files are
the only 8-bit surface; conversion happens exactly once at load/save.
"""

from __future__ import annotations

import io

import numpy as np
from PIL import Image

from .errors import InvalidArgumentError


def as_float_image(arr: np.ndarray) -> np.ndarray:
    """Coerce an array to float64 and check it lies in [0, 1]."""
    out = np.asarray(arr, dtype=np.float64)
    if out.size and (out.min() < -1e-12 or out.max() > 1 + 1e-12):
        raise InvalidArgumentError("raster values must lie in [0, 1]")
    return np.clip(out, 0.0, 1.0)


def load_png(path_or_bytes) -> np.ndarray:
    """Load a PNG as float64 in [0, 1]; RGB (H, W, 3) or grayscale (H, W)."""
    if isinstance(path_or_bytes, (bytes, bytearray)):
        img = Image.open(io.BytesIO(path_or_bytes))
    else:
        img = Image.open(path_or_bytes)
    if img.mode in ("L", "1", "I;16"):
        img = img.convert("L")
        return np.asarray(img, dtype=np.float64) / 255.0
    img = img.convert("RGB")
    return np.asarray(img, dtype=np.float64) / 255.0


def save_png(arr: np.ndarray, path=None) -> bytes:
    """Encode a float raster to 8-bit PNG; writes to `path` when given.

    Returns the PNG bytes either way so callers can hash or ship them.
    """
    a = np.clip(np.asarray(arr, dtype=np.float64), 0.0, 1.0)
    data = np.round(a * 255.0).astype(np.uint8)
    mode = "L" if data.ndim == 2 else "RGB"
    img = Image.fromarray(data, mode=mode)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    raw = buf.getvalue()
    if path is not None:
        with open(path, "wb") as fh:
            fh.write(raw)
    return raw


def to_gray(image: np.ndarray) -> np.ndarray:
    """Rec.601 luma of an RGB raster; grayscale input passes through."""
    if image.ndim == 2:
        return np.asarray(image, dtype=np.float64)
    return (
        0.299 * image[..., 0] + 0.587 * image[..., 1] + 0.114 * image[..., 2]
    ).astype(np.float64)


def _resize_axis_weights(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bilinear sample positions for one axis (pixel-center convention)."""
    coords = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    coords = np.clip(coords, 0.0, n_in - 1.0)
    lo = np.floor(coords).astype(np.int64)
    hi = np.minimum(lo + 1, n_in - 1)
    frac = coords - lo
    return lo, hi, frac


def resize_bilinear(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resample to (out_h, out_w); works on (H, W) and (H, W, C)."""
    if out_h < 1 or out_w < 1:
        raise InvalidArgumentError("output size must be positive")
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape[:2]
    if (h, w) == (out_h, out_w):
        return img.copy()
    ylo, yhi, fy = _resize_axis_weights(h, out_h)
    xlo, xhi, fx = _resize_axis_weights(w, out_w)
    fy = fy.reshape(-1, 1) if img.ndim == 2 else fy.reshape(-1, 1, 1)
    fx = fx.reshape(1, -1) if img.ndim == 2 else fx.reshape(1, -1, 1)
    top = img[ylo][:, xlo] * (1 - fx) + img[ylo][:, xhi] * fx
    bot = img[yhi][:, xlo] * (1 - fx) + img[yhi][:, xhi] * fx
    return top * (1 - fy) + bot * fy


def _area_weights(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) row-stochastic matrix averaging input cells into output cells."""
    weights = np.zeros((n_out, n_in), dtype=np.float64)
    scale = n_in / n_out
    for o in range(n_out):
        start, stop = o * scale, (o + 1) * scale
        first, last = int(np.floor(start)), int(np.ceil(stop)) - 1
        for i in range(first, min(last + 1, n_in)):
            overlap = min(stop, i + 1) - max(start, i)
            if overlap > 0:
                weights[o, i] = overlap
    weights /= weights.sum(axis=1, keepdims=True)
    return weights


def downsample_area(image: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Area-average downsample; exact for any integer or fractional ratio."""
    if out_h < 1 or out_w < 1:
        raise InvalidArgumentError("output size must be positive")
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape[:2]
    if (h, w) == (out_h, out_w):
        return img.copy()
    ry = _area_weights(h, out_h)
    rx = _area_weights(w, out_w)
    if img.ndim == 2:
        return ry @ img @ rx.T
    return np.einsum("oi,iwc,pw->opc", ry, img, rx, optimize=True)


def disc_element(radius: int) -> np.ndarray:
    """Boolean disc structuring element of the given pixel radius."""
    if radius < 1:
        raise InvalidArgumentError("radius must be >= 1")
    yy, xx = np.mgrid[-radius : radius + 1, -radius : radius + 1]
    return (yy * yy + xx * xx) <= radius * radius


def content_digest(png_bytes: bytes) -> str:
    """Stable content hash used by the edit service for staleness checks."""
    import hashlib

    return hashlib.sha256(png_bytes).hexdigest()
