"""Checkpoint IO: one .npz holding the config and every named parameter."""

from __future__ import annotations

import json

import numpy as np

from ..errors import CheckpointError
from .dit import ToyDiT, ToyModelConfig

FORMAT_TAG = "toydit-checkpoint-v1"


def save_checkpoint(model: ToyDiT, path) -> None:
    meta = json.dumps({"format": FORMAT_TAG, "config": model.config.to_json()})
    arrays = {f"param:{name}": value for name, value in model.state_arrays().items()}
    np.savez(path, __meta__=np.frombuffer(meta.encode("utf-8"), dtype=np.uint8), **arrays)


def load_checkpoint(path) -> ToyDiT:
    try:
        data = np.load(path)
    except (OSError, ValueError) as err:
        raise CheckpointError(f"cannot read checkpoint {path}: {err}") from err
    if "__meta__" not in data:
        raise CheckpointError("checkpoint has no metadata block")
    meta = json.loads(bytes(data["__meta__"]).decode("utf-8"))
    if meta.get("format") != FORMAT_TAG:
        raise CheckpointError(f"unsupported checkpoint format {meta.get('format')!r}")
    config = ToyModelConfig.from_json(meta["config"])
    model = ToyDiT(config)
    arrays = {key[len("param:"):]: data[key] for key in data.files if key.startswith("param:")}
    model.load_state_arrays(arrays)
    return model
