"""Attention core: shared QKV, LoRA cue branch, bias construction, biased softmax."""

from .attention import attention, attention_weights, masked_softmax
from .bias import BiasMatrix, ModulationSpec, build_bias
from .positions import remap_positions, sinusoidal_encoding
from .projection import LoraAdapter, ProjectionWeights, project_qkv, project_qkv_cue
from .streams import Role, StreamLayout, TokenStream, validate_streams

__all__ = [
    "attention",
    "attention_weights",
    "masked_softmax",
    "BiasMatrix",
    "ModulationSpec",
    "build_bias",
    "remap_positions",
    "sinusoidal_encoding",
    "LoraAdapter",
    "ProjectionWeights",
    "project_qkv",
    "project_qkv_cue",
    "Role",
    "StreamLayout",
    "TokenStream",
    "validate_streams",
]
