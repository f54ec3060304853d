"""Exception types shared across the toolkit."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class DegenerateRowError(RuntimeError):
    """An attention row has every column blocked, so softmax is undefined."""


class DegenerateQuadError(ValueError):
    """Four-point correspondence is degenerate (three points collinear)."""


class TrainingDivergedError(RuntimeError):
    """Loss became non-finite during training."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"training diverged at step {step}")


class LayerOutOfBoundsError(ValueError):
    """A content layer's placement falls entirely outside the canvas."""

    def __init__(self, layer_id: str, message: str = ""):
        self.layer_id = layer_id
        super().__init__(message or f"layer {layer_id!r} placed entirely outside the canvas")


class CheckpointError(RuntimeError):
    """A model checkpoint is missing, unreadable, or has the wrong format tag."""
