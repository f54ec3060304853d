"""Training-triplet assembly for every pipeline.

Content samples: extract the foreground, push it through the augmentation
chain (perspective -> relight -> resolution, each applied independently
with the configured probability), composite it back at its original
position, and overpaint random background brush masks with neutral gray.
Structural/color samples carry a cue map and no context image; spatial
samples derive masks from (source, edited) pairs; removal samples come
from paste-back synthesis.

Every record stores the full augmentation parameters, so any sample can
be rebuilt bitwise from the manifest alone.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..augment import (
    OcclusionRecord,
    PerspectiveRecord,
    RelightRecord,
    ResolutionRecord,
    apply_perspective,
    apply_relight,
    apply_resolution,
    extract_piece,
    paste_piece,
    sample_perspective_record,
    sample_relight_record,
    sample_resolution_record,
)
from ..compositor import degrade_color_map, rasterize_stroke
from ..edges import CannyParams, ExtractorRegistry, canny_extractor, default_registry, pick_extractor
from ..errors import InvalidArgumentError
from ..maskgen import ChangeMask, MaskRejection, derive_mask_multi, synthesize_removal_pair
from ..raster import load_png, save_png
from .config import BuilderConfig
from .manifest import SampleRecord, read_manifest, write_manifest

BBOX_PAD = 8  # background region excludes the fg bbox dilated by this much


# -- content pipeline ---------------------------------------------------------

def _sample_background_strokes(shape, rng: np.random.Generator, config: BuilderConfig):
    h, w = shape
    n = int(rng.integers(config.background_masks[0], config.background_masks[1] + 1))
    strokes = []
    for _ in range(n):
        points = [(float(rng.uniform(0, w - 1)), float(rng.uniform(0, h - 1)))]
        for _ in range(int(rng.integers(1, 4))):
            px, py = points[-1]
            points.append((
                float(np.clip(px + rng.uniform(-w / 4, w / 4), 0, w - 1)),
                float(np.clip(py + rng.uniform(-h / 4, h / 4), 0, h - 1)),
            ))
        radius = max(2.0, float(rng.uniform(0.02, 0.08)) * min(h, w))
        strokes.append({"points": [list(p) for p in points], "radius": radius})
    return strokes


def sample_content_record(source: np.ndarray, fg_mask: np.ndarray, rng: np.random.Generator,
                          config: BuilderConfig) -> dict:
    """Draw all randomness for one content sample into a replayable record."""
    piece = extract_piece(source, fg_mask)
    h, w = piece.size
    record: dict = {"applied": []}
    if rng.random() < config.augment_probability:
        record["applied"].append("perspective")
        record["perspective"] = sample_perspective_record(w, h, rng).to_json()
    if rng.random() < config.augment_probability:
        record["applied"].append("relight")
        record["relight"] = sample_relight_record(rng).to_json()
    if rng.random() < config.augment_probability:
        record["applied"].append("resolution")
        record["resolution"] = sample_resolution_record(rng).to_json()
    record["background"] = {
        "strokes": _sample_background_strokes(source.shape[:2], rng, config),
        "bbox_pad": BBOX_PAD,
        "fill": config.background_fill,
    }
    return record


def apply_content_record(source: np.ndarray, fg_mask: np.ndarray, record: dict):
    """Deterministic replay of a content record -> (input y, background mask)."""
    piece = extract_piece(source, fg_mask)
    if "perspective" in record.get("applied", []):
        piece = apply_perspective(piece, PerspectiveRecord.from_json(record["perspective"]))
    if "relight" in record.get("applied", []):
        piece = apply_relight(piece, RelightRecord.from_json(record["relight"]))
    if "resolution" in record.get("applied", []):
        piece = apply_resolution(piece, ResolutionRecord.from_json(record["resolution"]))
    composited = paste_piece(source, piece)

    bg = record["background"]
    h, w = source.shape[:2]
    ys, xs = np.nonzero(np.asarray(fg_mask) > 0.5)
    pad = int(bg["bbox_pad"])
    y0, y1 = max(ys.min() - pad, 0), min(ys.max() + 1 + pad, h)
    x0, x1 = max(xs.min() - pad, 0), min(xs.max() + 1 + pad, w)
    background_mask = np.zeros((h, w))
    for stroke in bg["strokes"]:
        background_mask = np.maximum(
            background_mask,
            rasterize_stroke([tuple(p) for p in stroke["points"]], stroke["radius"], h, w),
        )
    background_mask[y0:y1, x0:x1] = 0.0
    out = composited.copy()
    out[background_mask > 0.5] = bg["fill"]
    return out, background_mask


def build_content_sample(source: np.ndarray, fg_mask: np.ndarray, caption: str,
                         rng: np.random.Generator, config: BuilderConfig | None = None):
    """One content triplet: target = source, input = augmented composite."""
    config = config or BuilderConfig()
    record = sample_content_record(source, fg_mask, rng, config)
    y, background_mask = apply_content_record(source, fg_mask, record)
    return y, background_mask, record


# -- structural / color pipelines --------------------------------------------

def build_structural_sample(image: np.ndarray, rng: np.random.Generator,
                            registry: ExtractorRegistry, source_path=None):
    name, extractor = pick_extractor(registry, rng)
    cue = extractor(image, source_path)
    return cue, {"extractor": name}


def build_color_sample(image: np.ndarray, cue_size: int | tuple[int, int]):
    return degrade_color_map(image, cue_size), {}


# -- batch driver -------------------------------------------------------------

@dataclass
class BuildStats:
    total: int
    succeeded: int
    rejected: int
    failed: int

    @property
    def success_rate(self) -> float:
        return self.succeeded / self.total if self.total else 0.0


def _discover_inputs(pipeline: str, input_dir: Path):
    captions = {}
    captions_path = input_dir / "captions.json"
    if captions_path.exists():
        captions = json.loads(captions_path.read_text())
    if pipeline == "spatial":
        src_dir, edited_dir = input_dir / "src", input_dir / "edited"
        items = []
        for src in sorted(src_dir.glob("*.png")):
            edited = edited_dir / src.name
            if edited.exists():
                items.append({"stem": src.stem, "src": src, "edited": edited,
                              "caption": captions.get(src.stem, "")})
        return items
    items = []
    for image in sorted((input_dir / "images").glob("*.png")):
        entry = {"stem": image.stem, "image": image, "caption": captions.get(image.stem, "")}
        mask = input_dir / "masks" / image.name
        if mask.exists():
            entry["mask"] = mask
        if pipeline in ("content", "removal") and "mask" not in entry:
            continue
        items.append(entry)
    return items


def _build_one(pipeline: str, item: dict, index: int, seed_seq: np.random.SeedSequence,
               out_dir: Path, config: BuilderConfig, registry: ExtractorRegistry):
    rng = np.random.default_rng(seed_seq)
    stem = f"{index:05d}_{item['stem']}"
    images_dir, cues_dir, masks_dir = out_dir / "images", out_dir / "cues", out_dir / "masks"

    if pipeline == "content":
        source = load_png(item["image"])
        fg_mask = load_png(item["mask"])
        if fg_mask.ndim == 3:
            fg_mask = fg_mask.mean(axis=-1)
        fg_mask = (fg_mask > 0.5).astype(np.float64)
        y, background_mask, record = build_content_sample(source, fg_mask, item["caption"], rng, config)
        target_rel = f"images/{stem}_target.png"
        input_rel = f"images/{stem}_input.png"
        fg_rel = f"masks/{stem}_fg.png"
        bg_rel = f"masks/{stem}_bg.png"
        save_png(source, out_dir / target_rel)
        save_png(y, out_dir / input_rel)
        save_png(fg_mask, out_dir / fg_rel)
        save_png(background_mask, out_dir / bg_rel)
        return SampleRecord(
            sample_id=stem, pipeline="content", target_path=target_rel, input_path=input_rel,
            caption=item["caption"], fg_mask_path=fg_rel, background_mask_path=bg_rel,
            augmentations=record,
        )

    if pipeline == "removal":
        source = load_png(item["image"])
        fg_mask = load_png(item["mask"])
        if fg_mask.ndim == 3:
            fg_mask = fg_mask.mean(axis=-1)
        pair = synthesize_removal_pair(source, fg_mask > 0.5, rng)
        target_rel = f"images/{stem}_target.png"
        input_rel = f"images/{stem}_input.png"
        fg_rel = f"masks/{stem}_fg.png"
        cue_rel = f"cues/{stem}_spatial.png"
        save_png(pair.target_image, out_dir / target_rel)
        save_png(pair.input_image, out_dir / input_rel)
        save_png((fg_mask > 0.5).astype(np.float64), out_dir / fg_rel)
        save_png(pair.mask.astype(np.float64), out_dir / cue_rel)
        return SampleRecord(
            sample_id=stem, pipeline="removal", target_path=target_rel, input_path=input_rel,
            caption=item["caption"], fg_mask_path=fg_rel, cue_paths={"spatial": cue_rel},
            augmentations={"offset": list(pair.offset)},
        )

    if pipeline == "structural":
        image = load_png(item["image"])
        cue, record = build_structural_sample(image, rng, registry, item["image"])
        target_rel = f"images/{stem}_target.png"
        cue_rel = f"cues/{stem}_structural.png"
        save_png(image, out_dir / target_rel)
        save_png(cue, out_dir / cue_rel)
        return SampleRecord(
            sample_id=stem, pipeline="structural", target_path=target_rel,
            caption=item["caption"], cue_paths={"structural": cue_rel}, augmentations=record,
        )

    if pipeline == "color":
        image = load_png(item["image"])
        cue_size = config.cue_size or image.shape[:2]
        cue, record = build_color_sample(image, cue_size)
        target_rel = f"images/{stem}_target.png"
        cue_rel = f"cues/{stem}_color.png"
        save_png(image, out_dir / target_rel)
        save_png(cue, out_dir / cue_rel)
        return SampleRecord(
            sample_id=stem, pipeline="color", target_path=target_rel,
            caption=item["caption"], cue_paths={"color": cue_rel}, augmentations=record,
        )

    if pipeline == "spatial":
        src = load_png(item["src"])
        edited = load_png(item["edited"])
        result = derive_mask_multi(src, edited, thresholds=config.mask_thresholds,
                                   radius=config.smoothing_radius)
        if isinstance(result, MaskRejection):
            return result
        src_rel = f"images/{stem}_src.png"
        target_rel = f"images/{stem}_edited.png"
        cue_rel = f"cues/{stem}_spatial.png"
        save_png(src, out_dir / src_rel)
        save_png(edited, out_dir / target_rel)
        save_png(result.mask.astype(np.float64), out_dir / cue_rel)
        return SampleRecord(
            sample_id=stem, pipeline="spatial", target_path=target_rel, input_path=src_rel,
            caption=item["caption"], cue_paths={"spatial": cue_rel},
            augmentations={"threshold": result.delta_threshold,
                           "radius": config.smoothing_radius,
                           "ratio": result.hull_area_ratio},
        )

    raise InvalidArgumentError(f"unknown pipeline {pipeline!r}")


def build_dataset(
    pipeline: str,
    input_dir: Path | str,
    out_dir: Path | str,
    seed: int = 0,
    workers: int = 1,
    config: Optional[BuilderConfig] = None,
    registry: Optional[ExtractorRegistry] = None,
    limit: Optional[int] = None,
) -> tuple[Path, BuildStats]:
    """Run one pipeline over a directory of inputs; returns (manifest, stats)."""
    config = config or BuilderConfig()
    if registry is None:
        registry = ExtractorRegistry()
        registry.register("canny", canny_extractor(
            CannyParams(sigma=config.canny_sigma, low=config.canny_low, high=config.canny_high)
        ))
    input_dir, out_dir = Path(input_dir), Path(out_dir)
    items = _discover_inputs(pipeline, input_dir)
    if limit is not None:
        items = items[:limit]
    if not items:
        raise InvalidArgumentError(f"no inputs for pipeline {pipeline!r} in {input_dir}")
    for sub in ("images", "cues", "masks"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    seeds = np.random.SeedSequence(seed).spawn(len(items))
    results: list = [None] * len(items)

    def run(i):
        try:
            return _build_one(pipeline, items[i], i, seeds[i], out_dir, config, registry)
        except Exception as err:  # surfaced in stats; sample id in message
            raise RuntimeError(f"sample {i} ({items[i]['stem']}): {err}") from err

    if workers <= 1:
        for i in range(len(items)):
            results[i] = run(i)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(run, i): i for i in range(len(items))}
            for future, i in futures.items():
                results[i] = future.result()

    records = [r for r in results if isinstance(r, SampleRecord)]
    rejected = sum(1 for r in results if isinstance(r, MaskRejection))
    failed = len(items) - len(records) - rejected
    manifest_path = out_dir / "manifest.jsonl"
    write_manifest(records, manifest_path)
    stats = BuildStats(total=len(items), succeeded=len(records), rejected=rejected, failed=failed)
    return manifest_path, stats


# -- replay -------------------------------------------------------------------

def replay_record(record: SampleRecord, root: Path) -> dict[str, bytes]:
    """Rebuild every derived file of one record from its stored parameters.

    Returns {relative path: png bytes}; callers compare against disk.
    """
    out: dict[str, bytes] = {}
    if record.pipeline == "content":
        source = load_png(root / record.target_path)
        fg_mask = load_png(root / record.fg_mask_path)
        if fg_mask.ndim == 3:
            fg_mask = fg_mask.mean(axis=-1)
        y, background_mask = apply_content_record(source, (fg_mask > 0.5).astype(np.float64),
                                                  record.augmentations)
        out[record.input_path] = save_png(y)
        out[record.background_mask_path] = save_png(background_mask)
    elif record.pipeline == "removal":
        target = load_png(root / record.target_path)
        fg_mask = load_png(root / record.fg_mask_path)
        if fg_mask.ndim == 3:
            fg_mask = fg_mask.mean(axis=-1)
        pair = synthesize_removal_pair(target, fg_mask > 0.5, np.random.default_rng(0),
                                       offset=tuple(record.augmentations["offset"]))
        out[record.input_path] = save_png(pair.input_image)
        out[record.cue_paths["spatial"]] = save_png(pair.mask.astype(np.float64))
    elif record.pipeline == "structural":
        image = load_png(root / record.target_path)
        name = record.augmentations["extractor"]
        registry = default_registry()
        cue = registry.get(name)(image, root / record.target_path)
        out[record.cue_paths["structural"]] = save_png(cue)
    elif record.pipeline == "color":
        image = load_png(root / record.target_path)
        cue = load_png(root / record.cue_paths["color"])
        rebuilt = degrade_color_map(image, cue.shape[:2])
        out[record.cue_paths["color"]] = save_png(rebuilt)
    elif record.pipeline == "spatial":
        src = load_png(root / record.input_path)
        edited = load_png(root / record.target_path)
        from ..maskgen import derive_mask

        result = derive_mask(src, edited, threshold=record.augmentations["threshold"],
                             radius=record.augmentations.get("radius"))
        if not isinstance(result, ChangeMask):
            raise InvalidArgumentError(f"{record.sample_id}: replay rejected the pair")
        out[record.cue_paths["spatial"]] = save_png(result.mask.astype(np.float64))
    return out


def verify_replay(manifest_path: Path | str) -> list[str]:
    """Bitwise comparison of every derived file against its replay."""
    manifest_path = Path(manifest_path)
    root = manifest_path.parent
    mismatches: list[str] = []
    for record in read_manifest(manifest_path):
        rebuilt = replay_record(record, root)
        for rel, data in rebuilt.items():
            on_disk = (root / rel).read_bytes()
            if on_disk != data:
                mismatches.append(f"{record.sample_id}: {rel}")
    return mismatches
