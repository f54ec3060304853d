"""Removal-pair synthesis: duplicate a foreground at a random spot.

The pre-paste image is the target, the pasted image is the input, and the
mask covers the pasted footprint; training on such pairs teaches seamless
content removal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import binary_dilation

from ..errors import InvalidArgumentError
from ..raster import disc_element

FOOTPRINT_DILATION_PX = 4


@dataclass(frozen=True)
class RemovalPair:
    input_image: np.ndarray
    target_image: np.ndarray
    mask: np.ndarray
    offset: tuple[int, int]  # (dy, dx) of the pasted bbox's top-left


def synthesize_removal_pair(
    image: np.ndarray,
    fg_mask: np.ndarray,
    rng: np.random.Generator,
    offset: tuple[int, int] | None = None,
) -> RemovalPair:
    """Paste the masked foreground at a uniformly random in-bounds offset.

    `offset` pins the paste position (used for replay and tests); when
    None it is drawn uniformly over all fully in-bounds positions.
    """
    image = np.asarray(image, dtype=np.float64)
    mask = np.asarray(fg_mask, dtype=bool)
    if image.shape[:2] != mask.shape:
        raise InvalidArgumentError("image and mask sizes differ")
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise InvalidArgumentError("foreground mask is empty")
    if mask.all():
        raise InvalidArgumentError("foreground covers the whole image")
    h, w = mask.shape
    y0, y1 = ys.min(), ys.max()
    x0, x1 = xs.min(), xs.max()
    box_h, box_w = y1 - y0 + 1, x1 - x0 + 1
    if box_h > h or box_w > w:
        raise InvalidArgumentError("foreground larger than canvas")

    if offset is None:
        offset = (int(rng.integers(0, h - box_h + 1)), int(rng.integers(0, w - box_w + 1)))
    dy, dx = offset
    if not (0 <= dy <= h - box_h and 0 <= dx <= w - box_w):
        raise InvalidArgumentError("offset places the foreground out of bounds")

    piece = image[y0 : y1 + 1, x0 : x1 + 1]
    piece_mask = mask[y0 : y1 + 1, x0 : x1 + 1]
    pasted = image.copy()
    region = pasted[dy : dy + box_h, dx : dx + box_w]
    region[piece_mask] = piece[piece_mask]

    footprint = np.zeros((h, w), dtype=bool)
    footprint[dy : dy + box_h, dx : dx + box_w] = piece_mask
    out_mask = binary_dilation(footprint, structure=disc_element(FOOTPRINT_DILATION_PX))
    return RemovalPair(input_image=pasted, target_image=image, mask=out_mask, offset=(dy, dx))
