"""Extractor registry: built-in Canny plus file-backed external edge maps.

Neural extractors are represented only as providers that read precomputed
single-channel PNGs from a directory keyed by image stem; dataset building
samples uniformly among whatever is registered.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ..errors import InvalidArgumentError
from ..raster import load_png
from .canny import CannyParams, canny

# An extractor maps (image, source_path-or-None) -> edge map in [0, 1].
Extractor = Callable[[np.ndarray, Optional[Path]], np.ndarray]


class ExtractorRegistry:
    def __init__(self):
        self._extractors: dict[str, Extractor] = {}

    def register(self, name: str, extractor: Extractor) -> None:
        if name in self._extractors:
            raise InvalidArgumentError(f"extractor {name!r} already registered")
        self._extractors[name] = extractor

    @property
    def names(self) -> list[str]:
        return sorted(self._extractors)

    def get(self, name: str) -> Extractor:
        if name not in self._extractors:
            raise InvalidArgumentError(f"unknown extractor {name!r}")
        return self._extractors[name]

    def pick(self, rng: np.random.Generator) -> tuple[str, Extractor]:
        """Uniform choice among registered extractors."""
        if not self._extractors:
            raise InvalidArgumentError("extractor registry is empty")
        names = self.names
        name = names[int(rng.integers(0, len(names)))]
        return name, self._extractors[name]


def canny_extractor(params: CannyParams | None = None) -> Extractor:
    def run(image: np.ndarray, _source: Optional[Path] = None) -> np.ndarray:
        return canny(image, params)

    return run


def file_backed_extractor(map_dir: Path | str) -> Extractor:
    """Returns precomputed edge maps stored as <map_dir>/<image stem>.png."""
    map_dir = Path(map_dir)

    def run(image: np.ndarray, source: Optional[Path] = None) -> np.ndarray:
        if source is None:
            raise InvalidArgumentError("file-backed extractor needs the source path")
        path = map_dir / (Path(source).stem + ".png")
        if not path.exists():
            raise InvalidArgumentError(f"no precomputed edge map at {path}")
        edge = load_png(path)
        if edge.ndim == 3:
            edge = edge.mean(axis=-1)
        return edge

    return run


def default_registry(external_dirs: dict[str, Path | str] | None = None) -> ExtractorRegistry:
    registry = ExtractorRegistry()
    registry.register("canny", canny_extractor())
    for name, map_dir in (external_dirs or {}).items():
        registry.register(name, file_backed_extractor(map_dir))
    return registry


def pick_extractor(registry: ExtractorRegistry, rng: np.random.Generator) -> tuple[str, Extractor]:
    return registry.pick(rng)
