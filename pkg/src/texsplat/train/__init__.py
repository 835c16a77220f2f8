from .config import TrainConfig
from .losses import (
    loss_bilateral,
    loss_normal_consistency,
    loss_photometric,
    loss_sparsity,
)
from .adam import AdamOptimizer
from .autograd import GradientBundle, FreezeSpec, backward, render_with_loss
from .density import density_control

__all__ = [
    "AdamOptimizer",
    "FreezeSpec",
    "GradientBundle",
    "TrainConfig",
    "backward",
    "density_control",
    "loss_bilateral",
    "loss_normal_consistency",
    "loss_photometric",
    "loss_sparsity",
    "render_with_loss",
]
