"""Training configuration; defaults reproduce the published settings."""

from __future__ import annotations

from dataclasses import dataclass, fields

from ..errors import InvalidConfigurationError


@dataclass
class TrainConfig:
    # phase lengths
    phase1_iters: int = 10_000
    phase2_iters: int = 20_000
    phase3_iters: int = 5_000
    # learning rates (geometry/opacity/SH follow splatting-standard values)
    lr_position: float = 1.6e-4  # times scene extent, exp-decayed
    lr_position_final: float = 1.6e-6
    lr_quat: float = 1e-3
    lr_scale: float = 5e-3
    lr_opacity: float = 0.05
    lr_sh: float = 2.5e-3
    lr_sh_rest: float = 2.5e-3 / 20.0
    lr_shading: float = 0.01  # k_a/k_d/k_s/beta, c_ind and palette
    lr_texture: float = 0.025
    # loss weights
    lambda_ssim: float = 0.2
    lambda_n: float = 0.05
    lambda_alpha: float = 0.1
    lambda_bilateral: float = 0.01
    lambda_sparsity: float = 0.01
    # adaptive density control (global iteration numbers across phases 1-2)
    densify_interval: int = 100
    densify_start: int = 500
    densify_end: int = 15_000
    densify_grad_threshold: float = 2e-4  # NDC positional gradient
    densify_scale_threshold: float = 0.01  # of scene extent: clone below, split above
    split_factor: float = 1.6
    prune_opacity: float = 0.005
    # initialization
    init_primitives: int = 20_000
    init_opacity: float = 0.1
    # texture allocation
    t_total: int = 10_000_000
    # stylization
    lambda_s: float = 0.9
    npse_image_iters: int = 3_000
    npse_text_iters: int = 1_500
    # segmentation voting
    seg_threshold_ratio: float = 0.6
    seg_min_view_fraction: float = 0.5
    # bookkeeping
    eval_interval: int = 100
    seed: int = 0

    def validate(self) -> "TrainConfig":
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name.startswith("lr_") and v <= 0:
                raise InvalidConfigurationError(f"{f.name} must be positive")
            if f.name.endswith("_iters") and v < 0:
                raise InvalidConfigurationError(f"{f.name} must be >= 0")
        if not 0.0 <= self.lambda_s <= 1.0:
            raise InvalidConfigurationError("lambda_s must be in [0, 1]")
        if not 0.0 <= self.lambda_ssim <= 1.0:
            raise InvalidConfigurationError("lambda_ssim must be in [0, 1]")
        if self.t_total <= 0:
            raise InvalidConfigurationError("t_total must be positive")
        return self
