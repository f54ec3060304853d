"""Toy multi-modal diffusion transformer: model, training, sampling, IO."""

from .checkpoint import FORMAT_TAG, load_checkpoint, save_checkpoint
from .dit import CUE_CHANNELS, ToyDiT, ToyModelConfig, patchify, unpatchify
from .sampler import sample
from .tasks import TASK_COLOR_FIELD, ColorFieldTask, smooth_color_field
from .train import AdamW, TrainBatch, TrainResult, rf_interpolate, rf_loss, train

__all__ = [
    "FORMAT_TAG",
    "load_checkpoint",
    "save_checkpoint",
    "CUE_CHANNELS",
    "ToyDiT",
    "ToyModelConfig",
    "patchify",
    "unpatchify",
    "sample",
    "TASK_COLOR_FIELD",
    "ColorFieldTask",
    "smooth_color_field",
    "AdamW",
    "TrainBatch",
    "TrainResult",
    "rf_interpolate",
    "rf_loss",
    "train",
]
