"""Adam with per-attribute learning rates and post-step invariant projection."""

from __future__ import annotations

import numpy as np

from ..scene import BasicSceneModel
from .autograd import GradientBundle
from .config import TrainConfig

BETA1 = 0.9
BETA2 = 0.999
EPS = 1e-15

ATTRS = (
    "mu", "quat", "log_su", "log_sv", "opacity_logit",
    "c_ind", "sh", "k_a", "k_d", "k_s", "beta", "texels", "palette",
)


def position_lr(config: TrainConfig, extent: float, iteration: int, total: int) -> float:
    """Exponential decay from lr_position to lr_position_final over the run."""
    if total <= 0:
        return config.lr_position * extent
    tau = min(max(iteration / total, 0.0), 1.0)
    return extent * float(
        np.exp((1.0 - tau) * np.log(config.lr_position) + tau * np.log(config.lr_position_final))
    )


class AdamOptimizer:
    """Holds first/second moments shaped like the scene's attributes."""

    def __init__(self, scene: BasicSceneModel, config: TrainConfig, extent: float = 1.0, total_iters: int | None = None):
        self.config = config
        self.extent = extent
        self.total_iters = total_iters or (config.phase1_iters + config.phase2_iters)
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}
        self.resize(scene)

    def resize(self, scene: BasicSceneModel) -> None:
        for name in ATTRS:
            arr = getattr(scene, name)
            if arr is None:
                self.m.pop(name, None)
                self.v.pop(name, None)
                continue
            if name not in self.m or self.m[name].shape != arr.shape:
                self.m[name] = np.zeros_like(arr)
                self.v[name] = np.zeros_like(arr)

    def remap(self, keep: np.ndarray, n_new: int) -> None:
        """Keep moments of surviving primitives, zero moments for new ones."""
        for name in ATTRS:
            if name in ("palette", "texels") or name not in self.m:
                continue
            old_m, old_v = self.m[name], self.v[name]
            tail = (old_m.shape[1:],)
            new_shape = (keep.shape[0] + n_new, *old_m.shape[1:])
            m = np.zeros(new_shape)
            v = np.zeros(new_shape)
            m[: keep.shape[0]] = old_m[keep]
            v[: keep.shape[0]] = old_v[keep]
            self.m[name], self.v[name] = m, v

    def learning_rate(self, name: str, scene: BasicSceneModel, iteration: int):
        c = self.config
        if name == "mu":
            return position_lr(c, self.extent, iteration, self.total_iters)
        if name == "quat":
            return c.lr_quat
        if name in ("log_su", "log_sv"):
            return c.lr_scale
        if name == "opacity_logit":
            return c.lr_opacity
        if name == "sh":
            k = scene.sh.shape[1]
            lr = np.full((1, k, 1), c.lr_sh_rest)
            lr[0, 0, 0] = c.lr_sh
            return lr
        if name == "texels":
            return c.lr_texture
        return c.lr_shading  # c_ind, k_*, beta, palette

    def step(self, scene: BasicSceneModel, grads: GradientBundle, iteration: int) -> BasicSceneModel:
        """One Adam update; invariants re-imposed afterwards."""
        self.t += 1
        bc1 = 1.0 - BETA1**self.t
        bc2 = 1.0 - BETA2**self.t
        for name in ATTRS:
            param = getattr(scene, name)
            grad = getattr(grads, name)
            if param is None or grad is None:
                continue
            m = self.m[name]
            v = self.v[name]
            m *= BETA1
            m += (1.0 - BETA1) * grad
            v *= BETA2
            v += (1.0 - BETA2) * grad * grad
            lr = self.learning_rate(name, scene, iteration)
            param -= lr * (m / bc1) / (np.sqrt(v / bc2) + EPS)
        scene.project_parameters()
        return scene


def adam_step(
    scene: BasicSceneModel,
    grads: GradientBundle,
    config: TrainConfig,
    iteration: int,
    optimizer: AdamOptimizer | None = None,
) -> BasicSceneModel:
    """Single-call form of the optimizer step (state created on demand)."""
    opt = optimizer or AdamOptimizer(scene, config)
    return opt.step(scene, grads, iteration)
