"""Two-stage differentiable trainer for the streaming table-enhancement engine.

Builds a torch replica of the engine's full frame loop, trains it on
compressed/raw clip pairs (Charbonnier first, MSE fine-tune second) with
learnable quantization steps, and exports the engine's binary weights
format.  The engine itself is consumed only through its file formats.
"""

from .config import TrainConfig
from .datasets import ClipPair, augment_pair, load_clip_dir, sample_batch
from .errors import ConfigError, DataError, NumericError, TrainerError
from .formats import read_sidecar, read_y_planes, save_weights
from .losses import charbonnier_loss, mse_loss
from .model import ReplicaModel
from .quantize import lsq_quantize, quantize_indices, ties_away_round
from .training import export_weights, train

__all__ = [
    "ClipPair",
    "ConfigError",
    "DataError",
    "NumericError",
    "ReplicaModel",
    "TrainConfig",
    "TrainerError",
    "augment_pair",
    "charbonnier_loss",
    "export_weights",
    "load_clip_dir",
    "lsq_quantize",
    "mse_loss",
    "quantize_indices",
    "read_sidecar",
    "read_y_planes",
    "sample_batch",
    "save_weights",
    "ties_away_round",
    "train",
]
