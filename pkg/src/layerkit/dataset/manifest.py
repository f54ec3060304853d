"""JSONL sample manifests: one record per line, paths relative to the
manifest's directory, with full augmentation parameters for exact replay."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import InvalidArgumentError

PIPELINES = ("content", "spatial", "removal", "structural", "color")


@dataclass
class SampleRecord:
    sample_id: str
    pipeline: str
    target_path: str
    input_path: Optional[str] = None       # context image y; absent for y-free pipelines
    caption: str = ""
    fg_mask_path: Optional[str] = None
    background_mask_path: Optional[str] = None
    cue_paths: dict = field(default_factory=dict)   # cue name -> relative path
    augmentations: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise InvalidArgumentError(f"unknown pipeline {self.pipeline!r}")

    def to_json(self) -> dict:
        out = {
            "id": self.sample_id,
            "pipeline": self.pipeline,
            "target": self.target_path,
            "caption": self.caption,
            "cues": self.cue_paths,
            "augmentations": self.augmentations,
        }
        # y is omitted entirely (not empty) when the pipeline trains without context.
        if self.input_path is not None:
            out["input"] = self.input_path
        if self.fg_mask_path is not None:
            out["fg_mask"] = self.fg_mask_path
        if self.background_mask_path is not None:
            out["background_mask"] = self.background_mask_path
        if self.extras:
            out["extras"] = self.extras
        return out

    @classmethod
    def from_json(cls, data: dict) -> "SampleRecord":
        return cls(
            sample_id=data["id"],
            pipeline=data["pipeline"],
            target_path=data["target"],
            input_path=data.get("input"),
            caption=data.get("caption", ""),
            fg_mask_path=data.get("fg_mask"),
            background_mask_path=data.get("background_mask"),
            cue_paths=data.get("cues", {}),
            augmentations=data.get("augmentations", {}),
            extras=data.get("extras", {}),
        )


def write_manifest(records: list[SampleRecord], path: Path | str) -> None:
    path = Path(path)
    with open(path, "w") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")


def read_manifest(path: Path | str) -> list[SampleRecord]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(SampleRecord.from_json(json.loads(line)))
    return records


def validate_manifest(path: Path | str) -> list[str]:
    """Referential-integrity pass: returns a list of problems (empty = ok)."""
    path = Path(path)
    problems: list[str] = []
    root = path.parent
    try:
        records = read_manifest(path)
    except (json.JSONDecodeError, KeyError, InvalidArgumentError) as err:
        return [f"manifest unreadable: {err}"]
    seen_ids = set()
    for record in records:
        if record.sample_id in seen_ids:
            problems.append(f"{record.sample_id}: duplicate id")
        seen_ids.add(record.sample_id)
        paths = [record.target_path, record.input_path, record.fg_mask_path,
                 record.background_mask_path, *record.cue_paths.values()]
        for rel in paths:
            if rel is None:
                continue
            if Path(rel).is_absolute():
                problems.append(f"{record.sample_id}: absolute path {rel}")
            elif not (root / rel).exists():
                problems.append(f"{record.sample_id}: missing file {rel}")
    return problems
