"""Adaptive density control: clone small / split large high-gradient splats,
prune transparent ones. Runs in phases 1-2 only, before texel allocation."""

from __future__ import annotations

import numpy as np

from ..geometry import quat_to_rotation, quat_normalize
from ..scene import BasicSceneModel, logit
from .adam import AdamOptimizer
from .config import TrainConfig


def density_control(
    scene: BasicSceneModel,
    avg_positional_grad: np.ndarray,
    config: TrainConfig,
    extent: float,
    rng: np.random.Generator,
    optimizer: AdamOptimizer | None = None,
) -> tuple[BasicSceneModel, np.ndarray, int]:
    """Returns (scene, kept indices, number of appended primitives).

    Pruning keeps opacity >= prune threshold; among kept primitives with mean
    NDC positional gradient above the threshold, small ones are cloned with a
    tangent-plane jitter and large ones are split into two samples with scales
    shrunk by the split factor.
    """
    if scene.has_texture:
        raise ValueError("density control must run before texel allocation")
    opa = scene.opacity
    keep = np.nonzero(opa >= config.prune_opacity)[0]
    s = scene.select(keep)
    grad = avg_positional_grad[keep]

    size = np.maximum(s.s_u, s.s_v)
    hot = grad > config.densify_grad_threshold
    small = hot & (size < config.densify_scale_threshold * extent)
    large = hot & ~small

    clones = []
    if small.any():
        idx = np.nonzero(small)[0]
        c = s.select(idx)
        tu, tv, _ = c.frames()
        jit = rng.normal(size=(idx.size, 2)) * 0.3
        c.mu = c.mu + jit[:, :1] * c.s_u[:, None] * tu + jit[:, 1:] * c.s_v[:, None] * tv
        clones.append(c)
    if large.any():
        idx = np.nonzero(large)[0]
        for _ in range(2):
            c = s.select(idx)
            tu, tv, _ = c.frames()
            samp = rng.normal(size=(idx.size, 2))
            c.mu = c.mu + samp[:, :1] * c.s_u[:, None] * tu + samp[:, 1:] * c.s_v[:, None] * tv
            c.log_su = c.log_su - np.log(config.split_factor)
            c.log_sv = c.log_sv - np.log(config.split_factor)
            clones.append(c)

    if large.any():
        survivors = np.nonzero(~large)[0]
        s2 = s.select(survivors)
        kept_original = keep[survivors]
    else:
        s2 = s
        kept_original = keep

    n_new = 0
    if clones:
        parts = [s2] + clones
        merged = BasicSceneModel.empty()
        merged.palette = scene.palette.copy()
        merged.t_total = scene.t_total
        merged.edit_state = scene.edit_state.copy()
        merged.uses_palette = scene.uses_palette
        for name in ("mu", "quat", "c_ind"):
            setattr(merged, name, np.concatenate([getattr(p, name) for p in parts]))
        for name in ("log_su", "log_sv", "opacity_logit", "k_a", "k_d", "k_s", "beta"):
            setattr(merged, name, np.concatenate([getattr(p, name) for p in parts]))
        if scene.sh is not None:
            merged.sh = np.concatenate([p.sh for p in parts])
        merged.quat = quat_normalize(merged.quat)
        n_new = merged.num_primitives - s2.num_primitives
        out = merged
    else:
        out = s2

    if optimizer is not None:
        # moments follow survivors; appended primitives start fresh
        order = np.concatenate([kept_original]) if n_new == 0 else kept_original
        optimizer.remap(order, n_new)
        optimizer.resize(out)
    return out, kept_original, n_new
