"""Dataset assembly: triplet builders, JSONL manifests, replay verification."""

from .builder import (
    BuildStats,
    apply_content_record,
    build_color_sample,
    build_content_sample,
    build_dataset,
    build_structural_sample,
    replay_record,
    sample_content_record,
    verify_replay,
)
from .config import BuilderConfig
from .manifest import PIPELINES, SampleRecord, read_manifest, validate_manifest, write_manifest

__all__ = [
    "BuildStats",
    "apply_content_record",
    "build_color_sample",
    "build_content_sample",
    "build_dataset",
    "build_structural_sample",
    "replay_record",
    "sample_content_record",
    "verify_replay",
    "BuilderConfig",
    "PIPELINES",
    "SampleRecord",
    "read_manifest",
    "validate_manifest",
    "write_manifest",
]
