"""Euler sampling of the rectified flow from t=1 (noise) to t=0."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import InvalidArgumentError
from .dit import ToyDiT


def sample(
    model: ToyDiT,
    task_ids: np.ndarray,
    context: Optional[np.ndarray] = None,
    cues: Optional[dict] = None,
    strengths: Optional[dict] = None,
    steps: Optional[int] = None,
    seed: int = 0,
    strict_sigma_zero: bool = False,
    initial_noise: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Integrate z_{t-dt} = z_t - dt * v(z_t, t); clamp to [0, 1] at the end.

    `initial_noise` overrides the seeded Gaussian draw (tests use this to
    pin the start point).  Returns (B, H, W, 3).
    """
    c = model.config
    if steps is None:
        steps = c.denoise_steps
    if steps < 1:
        raise InvalidArgumentError("steps must be >= 1")
    task_ids = np.atleast_1d(np.asarray(task_ids, dtype=np.int64))
    batch = task_ids.shape[0]
    if initial_noise is not None:
        z = np.array(initial_noise, dtype=np.float64)
        if z.shape != (batch, c.image_size, c.image_size, 3):
            raise InvalidArgumentError("initial noise has the wrong shape")
    else:
        rng = np.random.default_rng(seed)
        z = rng.standard_normal((batch, c.image_size, c.image_size, 3))
    dt = 1.0 / steps
    for k in range(steps):
        t = 1.0 - k * dt
        v = model.velocity(
            z, np.full(batch, t), task_ids,
            context=context, cues=cues, strengths=strengths,
            strict_sigma_zero=strict_sigma_zero,
        )
        z = z - dt * v
    return np.clip(z, 0.0, 1.0)
