"""A small multi-modal diffusion transformer over patchified pixels.

Streams are concatenated as [task token; noisy image; context; cues...],
projected with shared QKV weights (cue streams add their low-rank
branch), and mixed with biased multi-head attention whose per-cue
strengths come from the caller.  "Text" is a learned task embedding;
"latents" are raw pixels patchified with a linear embed/unembed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..attention import (
    BiasMatrix,
    ModulationSpec,
    StreamLayout,
    build_bias,
    remap_positions,
    sinusoidal_encoding,
)
from ..errors import InvalidArgumentError
from . import autodiff as ad

CUE_CHANNELS = {"spatial": 1, "structural": 1, "color": 3}


@dataclass(frozen=True)
class ToyModelConfig:
    image_size: int = 16
    patch_size: int = 2
    d_model: int = 64
    heads: int = 2
    blocks: int = 2
    cue_resolution: int | None = None  # defaults to image_size
    lora_rank_content: int = 32
    lora_rank_control: int = 128  # capped at d_model
    learning_rate: float = 1e-4
    denoise_steps: int = 20
    n_tasks: int = 8
    mlp_ratio: int = 4
    cue_types: tuple[str, ...] = ("spatial", "structural", "color")

    def __post_init__(self):
        if self.image_size % self.patch_size != 0:
            raise InvalidArgumentError("patch size must divide image size")
        if self.d_model % self.heads != 0:
            raise InvalidArgumentError("heads must divide d_model")
        if self.d_model % 4 != 0:
            raise InvalidArgumentError("d_model must be divisible by 4")
        for cue in self.cue_types:
            if cue not in CUE_CHANNELS:
                raise InvalidArgumentError(f"unknown cue type {cue!r}")

    @property
    def cue_size(self) -> int:
        return self.cue_resolution or self.image_size

    @property
    def control_rank(self) -> int:
        return min(self.lora_rank_control, self.d_model)

    @property
    def content_rank(self) -> int:
        return min(self.lora_rank_content, self.d_model)

    @property
    def grid(self) -> int:
        return self.image_size // self.patch_size

    @property
    def cue_grid(self) -> int:
        return self.cue_size // self.patch_size

    @property
    def patch_dim(self) -> int:
        return self.patch_size**2 * 3

    def to_json(self) -> dict:
        return {
            "image_size": self.image_size,
            "patch_size": self.patch_size,
            "d_model": self.d_model,
            "heads": self.heads,
            "blocks": self.blocks,
            "cue_resolution": self.cue_resolution,
            "lora_rank_content": self.lora_rank_content,
            "lora_rank_control": self.lora_rank_control,
            "learning_rate": self.learning_rate,
            "denoise_steps": self.denoise_steps,
            "n_tasks": self.n_tasks,
            "mlp_ratio": self.mlp_ratio,
            "cue_types": list(self.cue_types),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ToyModelConfig":
        data = dict(data)
        data["cue_types"] = tuple(data.get("cue_types", ("spatial", "structural", "color")))
        return cls(**data)


def patchify(images: np.ndarray, patch: int) -> np.ndarray:
    """(B, H, W, C) -> (B, (H/p)(W/p), p*p*C), row-major patch order."""
    b, h, w, c = images.shape
    gh, gw = h // patch, w // patch
    x = images.reshape(b, gh, patch, gw, patch, c)
    return x.transpose(0, 1, 3, 2, 4, 5).reshape(b, gh * gw, patch * patch * c)


def unpatchify(tokens: np.ndarray, patch: int, grid_h: int, grid_w: int, channels: int = 3) -> np.ndarray:
    b = tokens.shape[0]
    x = tokens.reshape(b, grid_h, grid_w, patch, patch, channels)
    return x.transpose(0, 1, 3, 2, 4, 5).reshape(b, grid_h * patch, grid_w * patch, channels)


def _time_features(t: np.ndarray, dim: int) -> np.ndarray:
    """Sinusoidal features of t in [0, 1], scaled for frequency spread."""
    half = dim // 2
    freqs = np.exp(-np.log(10000.0) * np.arange(half) / half)
    angles = t[:, None] * 1000.0 * freqs[None, :]
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=1)


class ToyDiT:
    """Velocity-prediction transformer with per-cue LoRA condition branches."""

    def __init__(self, config: ToyModelConfig, seed: int = 0):
        self.config = config
        self.params: dict[str, ad.Tensor] = {}
        self._init_params(np.random.default_rng(seed))
        c = config
        self._pos_image = sinusoidal_encoding(
            remap_positions(c.grid, c.grid, c.image_size, c.image_size), c.d_model
        )
        self._pos_cue = sinusoidal_encoding(
            remap_positions(c.cue_grid, c.cue_grid, c.image_size, c.image_size), c.d_model
        )

    # -- parameters ---------------------------------------------------------

    def _init_params(self, rng: np.random.Generator) -> None:
        c = self.config
        d = c.d_model

        def init(name, shape, std=None):
            if std is None:
                std = 1.0 / np.sqrt(shape[-1])
            self.params[name] = ad.parameter(rng.normal(0.0, std, size=shape), name)

        def zeros(name, shape):
            self.params[name] = ad.parameter(np.zeros(shape), name)

        init("task_embed", (c.n_tasks, d), std=0.02)
        init("patch_embed_w", (d, c.patch_dim))
        zeros("patch_embed_b", (d,))
        zeros("context_flag", (d,))
        for cue in c.cue_types:
            init(f"cue_embed_w.{cue}", (d, c.patch_size**2 * CUE_CHANNELS[cue]))
            zeros(f"cue_embed_b.{cue}", (d,))
        init("time_w1", (d, d))
        zeros("time_b1", (d,))
        init("time_w2", (d, d))
        zeros("time_b2", (d,))
        for b in range(c.blocks):
            p = f"block{b}."
            for side in ("q", "k", "v"):
                init(p + f"w_{side}", (d, d))
                # Content branch: rank-32 LoRA over the shared projections.
                init(p + f"lora_content.a_{side}", (c.content_rank, d), std=0.02)
                zeros(p + f"lora_content.b_{side}", (d, c.content_rank))
                for cue in c.cue_types:
                    init(p + f"lora_{cue}.a_{side}", (c.control_rank, d), std=0.02)
                    zeros(p + f"lora_{cue}.b_{side}", (d, c.control_rank))
            init(p + "attn_out_w", (d, d))
            zeros(p + "attn_out_b", (d,))
            for ln in ("ln1", "ln2"):
                self.params[p + ln + "_g"] = ad.parameter(np.ones(d), p + ln + "_g")
                zeros(p + ln + "_b", (d,))
            init(p + "mlp_w1", (c.mlp_ratio * d, d))
            zeros(p + "mlp_b1", (c.mlp_ratio * d,))
            init(p + "mlp_w2", (d, c.mlp_ratio * d))
            zeros(p + "mlp_b2", (d,))
        self.params["final_ln_g"] = ad.parameter(np.ones(d), "final_ln_g")
        zeros("final_ln_b", (d,))
        # Zero-init readout: the model predicts zero velocity at start.
        zeros("unembed_w", (c.patch_dim, d))
        zeros("unembed_b", (c.patch_dim,))

    def is_lora_param(self, name: str) -> bool:
        return ".lora_" in name or name.startswith("lora_")

    def set_trainable(self, freeze_base: bool) -> None:
        """With the base frozen, only LoRA matrices keep gradients."""
        for name, tensor in self.params.items():
            tensor.requires_grad = (not freeze_base) or self.is_lora_param(name)

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: t.value.copy() for name, t in self.params.items()}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, tensor in self.params.items():
            if name not in arrays:
                raise InvalidArgumentError(f"checkpoint is missing parameter {name!r}")
            if arrays[name].shape != tensor.value.shape:
                raise InvalidArgumentError(f"parameter {name!r} has the wrong shape")
            tensor.value = np.asarray(arrays[name], dtype=np.float64).copy()

    # -- forward ------------------------------------------------------------

    def _embed_cue(self, name: str, cue_map: np.ndarray) -> ad.Tensor:
        c = self.config
        cue = np.asarray(cue_map, dtype=np.float64)
        if cue.ndim == 3:
            cue = cue[..., None]
        if cue.shape[1] != c.cue_size or cue.shape[2] != c.cue_size:
            raise InvalidArgumentError(
                f"cue {name!r} must be {c.cue_size}x{c.cue_size}, got {cue.shape[1:3]}"
            )
        if cue.shape[-1] != CUE_CHANNELS[name]:
            raise InvalidArgumentError(f"cue {name!r} has the wrong channel count")
        tokens = ad.const(patchify(cue, c.patch_size))
        emb = ad.linear(tokens, self.params[f"cue_embed_w.{name}"], self.params[f"cue_embed_b.{name}"])
        return ad.add(emb, ad.const(self._pos_cue[None]))

    def _project_stream(self, h_seg: ad.Tensor, block: str, side: str, cue: str | None) -> ad.Tensor:
        base = ad.linear(h_seg, self.params[f"{block}.w_{side}"])
        content = ad.linear(
            ad.linear(h_seg, self.params[f"{block}.lora_content.a_{side}"]),
            self.params[f"{block}.lora_content.b_{side}"],
        )
        out = ad.add(base, content)
        if cue is not None:
            delta = ad.linear(
                ad.linear(h_seg, self.params[f"{block}.lora_{cue}.a_{side}"]),
                self.params[f"{block}.lora_{cue}.b_{side}"],
            )
            out = ad.add(out, delta)
        return out

    def forward_tokens(
        self,
        z_t: np.ndarray,
        t: np.ndarray,
        task_ids: np.ndarray,
        context: np.ndarray | None = None,
        cues: dict[str, np.ndarray] | None = None,
        strengths: dict[str, float] | None = None,
        strict_sigma_zero: bool = False,
    ) -> ad.Tensor:
        """Velocity prediction as patch tokens (B, grid^2, patch_dim)."""
        c = self.config
        cues = cues or {}
        strengths = dict(strengths or {})
        for name in cues:
            if name not in c.cue_types:
                raise InvalidArgumentError(f"model has no branch for cue {name!r}")
            strengths.setdefault(name, 1.0)

        z_t = np.asarray(z_t, dtype=np.float64)
        batch = z_t.shape[0]
        t = np.broadcast_to(np.asarray(t, dtype=np.float64), (batch,))

        text = ad.embedding(self.params["task_embed"], task_ids)

        x_tokens = ad.const(patchify(z_t, c.patch_size))
        x_emb = ad.linear(x_tokens, self.params["patch_embed_w"], self.params["patch_embed_b"])
        x_emb = ad.add(x_emb, ad.const(self._pos_image[None]))
        t_feat = ad.const(_time_features(t, c.d_model)[:, None, :])
        t_hidden = ad.gelu(ad.linear(t_feat, self.params["time_w1"], self.params["time_b1"]))
        t_emb = ad.linear(t_hidden, self.params["time_w2"], self.params["time_b2"])
        x_emb = ad.add(x_emb, t_emb)

        parts = [text, x_emb]
        n_context = 0
        if context is not None:
            y_tokens = ad.const(patchify(np.asarray(context, dtype=np.float64), c.patch_size))
            y_emb = ad.linear(y_tokens, self.params["patch_embed_w"], self.params["patch_embed_b"])
            y_emb = ad.add(y_emb, ad.const(self._pos_image[None]))
            y_emb = ad.add(y_emb, self.params["context_flag"])
            parts.append(y_emb)
            n_context = c.grid**2

        cue_order = [name for name in c.cue_types if name in cues]
        for name in cue_order:
            parts.append(self._embed_cue(name, cues[name]))

        layout = StreamLayout.from_counts(
            n_text=1,
            n_image=c.grid**2,
            n_context=n_context,
            cues={name: c.cue_grid**2 for name in cue_order},
        )
        bias = build_bias(
            layout,
            ModulationSpec({name: strengths[name] for name in cue_order}),
            strict=strict_sigma_zero,
        )

        h = ad.concat_tokens(parts)
        segments = [(None, 0, 1 + c.grid**2 + n_context)]
        offset = segments[0][2]
        for name in cue_order:
            segments.append((name, offset, offset + c.cue_grid**2))
            offset += c.cue_grid**2

        for b in range(c.blocks):
            block = f"block{b}"
            normed = ad.layer_norm(h, self.params[f"{block}.ln1_g"], self.params[f"{block}.ln1_b"])
            qkv = []
            for side in ("q", "k", "v"):
                pieces = [
                    self._project_stream(ad.slice_tokens(normed, start, stop), block, side, cue)
                    for cue, start, stop in segments
                ]
                qkv.append(ad.concat_tokens(pieces) if len(pieces) > 1 else pieces[0])
            attn = ad.biased_attention(qkv[0], qkv[1], qkv[2], bias, c.heads)
            attn = ad.linear(attn, self.params[f"{block}.attn_out_w"], self.params[f"{block}.attn_out_b"])
            h = ad.add(h, attn)
            normed2 = ad.layer_norm(h, self.params[f"{block}.ln2_g"], self.params[f"{block}.ln2_b"])
            hidden = ad.gelu(ad.linear(normed2, self.params[f"{block}.mlp_w1"], self.params[f"{block}.mlp_b1"]))
            h = ad.add(h, ad.linear(hidden, self.params[f"{block}.mlp_w2"], self.params[f"{block}.mlp_b2"]))

        x_only = ad.slice_tokens(h, 1, 1 + c.grid**2)
        x_only = ad.layer_norm(x_only, self.params["final_ln_g"], self.params["final_ln_b"])
        return ad.linear(x_only, self.params["unembed_w"], self.params["unembed_b"])

    def velocity(
        self,
        z_t: np.ndarray,
        t: float | np.ndarray,
        task_ids: np.ndarray,
        context: np.ndarray | None = None,
        cues: dict[str, np.ndarray] | None = None,
        strengths: dict[str, float] | None = None,
        strict_sigma_zero: bool = False,
    ) -> np.ndarray:
        """Velocity field as images (B, H, W, 3); no gradients retained."""
        tokens = self.forward_tokens(
            z_t, t, task_ids, context=context, cues=cues, strengths=strengths,
            strict_sigma_zero=strict_sigma_zero,
        )
        c = self.config
        return unpatchify(tokens.value, c.patch_size, c.grid, c.grid)
