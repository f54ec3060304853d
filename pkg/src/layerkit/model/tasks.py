"""Synthetic toy tasks for training and evaluating the small model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..compositor import degrade_color_map
from ..raster import resize_bilinear
from .dit import ToyModelConfig
from .train import TrainBatch

TASK_COLOR_FIELD = 0


def smooth_color_field(rng: np.random.Generator, size: int, control_grid: int = 4) -> np.ndarray:
    """A smooth random RGB field: bilinear upsample of a tiny random grid."""
    coarse = rng.uniform(0.0, 1.0, size=(control_grid, control_grid, 3))
    return np.clip(resize_bilinear(coarse, size, size), 0.0, 1.0)


@dataclass
class ColorFieldTask:
    """Conditional generation: reproduce a smooth color field from its
    degraded color cue (context-free, matching color-layer training)."""

    config: ToyModelConfig

    def make_sample(self, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        target = smooth_color_field(rng, self.config.image_size)
        cue = degrade_color_map(target, self.config.cue_size)
        return target, cue

    def sample_batch(self, rng: np.random.Generator, batch_size: int) -> TrainBatch:
        targets = np.empty((batch_size, self.config.image_size, self.config.image_size, 3))
        cues = np.empty((batch_size, self.config.cue_size, self.config.cue_size, 3))
        for i in range(batch_size):
            targets[i], cues[i] = self.make_sample(rng)
        return TrainBatch(
            targets=targets,
            task_ids=np.full(batch_size, TASK_COLOR_FIELD),
            contexts=None,
            cues={"color": cues},
            strengths={"color": 1.0},
        )
