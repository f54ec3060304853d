"""Dataset-builder configuration, loadable from TOML."""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ..errors import InvalidArgumentError


@dataclass(frozen=True)
class BuilderConfig:
    augment_probability: float = 0.7       # independent chance per augmentation
    background_fill: float = 0.5           # neutral gray for background masks
    background_masks: tuple[int, int] = (1, 3)
    mask_threshold: float = 6.0
    mask_thresholds: tuple[float, ...] = (6.0, 3.0, 12.0)
    smoothing_radius: int | None = None    # None = size-derived default
    canny_sigma: float = 1.4
    canny_low: float = 0.1
    canny_high: float = 0.3
    cue_size: int | None = None            # None = image size
    min_success_rate: float = 0.95

    def __post_init__(self):
        if not 0.0 <= self.augment_probability <= 1.0:
            raise InvalidArgumentError("augment probability must lie in [0, 1]")
        if not 0.0 <= self.background_fill <= 1.0:
            raise InvalidArgumentError("background fill must lie in [0, 1]")

    @classmethod
    def from_toml(cls, path: Path | str) -> "BuilderConfig":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        for key in ("background_masks", "mask_thresholds"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)
