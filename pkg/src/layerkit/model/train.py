"""Rectified-flow training: straight-line interpolation, velocity
regression, and an AdamW loop with optional base-weight freezing."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from ..errors import InvalidArgumentError, TrainingDivergedError
from . import autodiff as ad
from .dit import ToyDiT, patchify

ADAMW_BETAS = (0.9, 0.999)
ADAMW_EPS = 1e-8
ADAMW_WEIGHT_DECAY = 0.01


def rf_interpolate(x: np.ndarray, eps: np.ndarray, t: float | np.ndarray) -> np.ndarray:
    """z_t = (1 - t) x + t eps, elementwise; t broadcasts over pixels."""
    x = np.asarray(x, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    if x.shape != eps.shape:
        raise InvalidArgumentError("x and eps must have equal shapes")
    t_arr = np.asarray(t, dtype=np.float64)
    if t_arr.min() < 0.0 or t_arr.max() > 1.0:
        raise InvalidArgumentError("t must lie in [0, 1]")
    while t_arr.ndim < x.ndim:
        t_arr = t_arr[..., None]
    return (1.0 - t_arr) * x + t_arr * eps


@dataclass
class TrainBatch:
    """One training batch: targets, conditioning, and per-cue strengths."""

    targets: np.ndarray                      # (B, H, W, 3)
    task_ids: np.ndarray                     # (B,)
    contexts: Optional[np.ndarray] = None    # (B, H, W, 3) or None (y absent)
    cues: dict = field(default_factory=dict)      # name -> (B, h, w[, c]) in [0, 1]
    strengths: dict = field(default_factory=dict)  # name -> sigma (default 1)

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=np.float64)
        self.task_ids = np.asarray(self.task_ids, dtype=np.int64)
        for name in self.cues:
            self.strengths.setdefault(name, 1.0)


class Dataset(Protocol):
    def sample_batch(self, rng: np.random.Generator, batch_size: int) -> TrainBatch: ...


def rf_loss(
    model: ToyDiT,
    batch: TrainBatch,
    rng: np.random.Generator,
    t: Optional[np.ndarray] = None,
    eps: Optional[np.ndarray] = None,
    step: int = 0,
) -> tuple[ad.Tensor, dict]:
    """MSE between predicted velocity and (eps - x); returns the loss node
    (gradients flow on .backward()) plus the draws used."""
    x = batch.targets
    b = x.shape[0]
    if t is None:
        t = rng.uniform(0.0, 1.0, size=b)
    if eps is None:
        eps = rng.standard_normal(x.shape)
    z_t = rf_interpolate(x, eps, t)
    pred = model.forward_tokens(
        z_t, t, batch.task_ids,
        context=batch.contexts, cues=batch.cues, strengths=batch.strengths,
    )
    target_tokens = patchify(eps - x, model.config.patch_size)
    loss = ad.mse(pred, target_tokens)
    if not np.isfinite(loss.value):
        raise TrainingDivergedError(step)
    return loss, {"t": t, "eps": eps}


class AdamW:
    """Decoupled weight decay; decay applies to matrices only."""

    def __init__(
        self,
        params: dict[str, ad.Tensor],
        lr: float,
        betas: tuple[float, float] = ADAMW_BETAS,
        eps: float = ADAMW_EPS,
        weight_decay: float = ADAMW_WEIGHT_DECAY,
    ):
        self.params = params
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.m = {name: np.zeros_like(p.value) for name, p in params.items()}
        self.v = {name: np.zeros_like(p.value) for name, p in params.items()}

    def step(self) -> None:
        self.step_count += 1
        b1, b2 = self.betas
        bias1 = 1.0 - b1**self.step_count
        bias2 = 1.0 - b2**self.step_count
        for name, p in self.params.items():
            if not p.requires_grad or p.grad is None:
                continue
            g = p.grad
            self.m[name] = b1 * self.m[name] + (1 - b1) * g
            self.v[name] = b2 * self.v[name] + (1 - b2) * g * g
            m_hat = self.m[name] / bias1
            v_hat = self.v[name] / bias2
            if self.weight_decay and p.value.ndim >= 2:
                p.value -= self.lr * self.weight_decay * p.value
            p.value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()


@dataclass
class TrainResult:
    losses: list[float]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "loss"])
            for step, loss in enumerate(self.losses):
                writer.writerow([step, f"{loss:.10g}"])


def train(
    model: ToyDiT,
    dataset: Dataset,
    steps: int,
    lr: Optional[float] = None,
    batch_size: int = 8,
    seed: int = 0,
    freeze_base: bool = False,
    loss_csv: Optional[str] = None,
) -> TrainResult:
    """Deterministic AdamW training loop; returns the per-step loss curve."""
    if steps < 1:
        raise InvalidArgumentError("steps must be >= 1")
    model.set_trainable(freeze_base)
    optimizer = AdamW(model.params, lr=model.config.learning_rate if lr is None else lr)
    rng = np.random.default_rng(seed)
    losses: list[float] = []
    for step in range(steps):
        batch = dataset.sample_batch(rng, batch_size)
        optimizer.zero_grad()
        loss, _ = rf_loss(model, batch, rng, step=step)
        loss.backward()
        optimizer.step()
        losses.append(float(loss.value))
    result = TrainResult(losses=losses)
    if loss_csv is not None:
        result.write_csv(loss_csv)
    return result
