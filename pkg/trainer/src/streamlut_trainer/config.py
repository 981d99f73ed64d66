"""Training hyperparameters.

The defaults are desk-scale: large enough to demonstrate the two-stage
scheme end to end on toy clips, small enough to run on a CPU in minutes.
Stage 1 minimizes the Charbonnier loss; stage 2 fine-tunes with MSE at a
much smaller rate.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class TrainConfig:
    crop: int = 180
    batch: int = 8
    frames_per_sample: int = 3
    stage1_iters: int = 2000
    stage1_lr: float = 1e-4
    stage2_iters: int = 1000
    stage2_lr: float = 1e-6
    cosine_annealing: bool = True
    charbonnier_eps: float = 1e-6
    window: int = 7
    seed: int = 0
    # Adam moment/stability constants; the optimizer choice names no betas,
    # so the framework defaults are recorded here explicitly.
    adam_betas: tuple = (0.9, 0.999)
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.crop < 4:
            raise ConfigError(f"crop must be >= 4, got {self.crop}")
        if self.batch < 1:
            raise ConfigError(f"batch must be >= 1, got {self.batch}")
        if self.frames_per_sample < 1:
            raise ConfigError(
                f"frames_per_sample must be >= 1, got {self.frames_per_sample}"
            )
        if self.stage1_iters < 0 or self.stage2_iters < 0:
            raise ConfigError("iteration counts must be non-negative")
        if self.stage1_lr <= 0 or self.stage2_lr <= 0:
            raise ConfigError("learning rates must be positive")
        if self.charbonnier_eps <= 0:
            raise ConfigError(f"eps must be positive, got {self.charbonnier_eps}")
        if self.window < 1:
            raise ConfigError(f"window must be >= 1, got {self.window}")
