"""Resolution of trained parameters + edit state into render-time values.

Both the tiled renderer and the naive reference consume this single
resolution step, so photometric edits mean the same thing in each; the
rasterization math itself stays independent between them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..scene import BasicSceneModel, ComposedScene, LightConfig, as_composed


@dataclass
class EffectiveScene:
    """Per-primitive render-time values for one basic scene."""

    o_eff: np.ndarray  # (N,), opacity * edit factor, clamped to [0, 1]
    k_a: np.ndarray
    k_d: np.ndarray
    k_s: np.ndarray
    beta: np.ndarray
    base3: np.ndarray  # (N, 3) additive base color (see below)
    light_dir: np.ndarray  # (3,)
    light_spec: np.ndarray  # (3,) specular light color * scale
    light_amb: float
    light_diff: float
    opacity_clamped: np.ndarray  # (N,) bool, where the [0,1] clamp was active


def resolve_effective(scene: BasicSceneModel, light: LightConfig) -> EffectiveScene:
    """Apply the scene's edit state on top of trained parameters.

    The base color is what shading adds the texture sample to:
      - textured scene using its palette: the active palette (override or trained);
      - textured scene after stylization (palette bypassed): the override or zero;
      - untextured scene: per-primitive c_ind, shifted by any palette delta.
    """
    es = scene.edit_state
    o_raw = scene.opacity * es.opacity_factor
    o_eff = np.clip(o_raw, 0.0, 1.0)
    n = scene.num_primitives
    if scene.has_texture:
        if scene.uses_palette:
            base = es.palette_override if es.palette_override is not None else scene.palette
        else:
            base = es.palette_override if es.palette_override is not None else np.zeros(3)
        base3 = np.broadcast_to(np.asarray(base, dtype=np.float64), (n, 3)).copy()
    else:
        base3 = scene.c_ind.copy()
        if es.palette_override is not None:
            base3 = base3 + (np.asarray(es.palette_override) - scene.palette)
    ldir = es.light_direction()
    if ldir is None:
        ldir = light.direction
    return EffectiveScene(
        o_eff=o_eff,
        k_a=scene.k_a * es.ka_factor,
        k_d=scene.k_d * es.kd_factor,
        k_s=scene.k_s * es.ks_factor,
        beta=np.maximum(scene.beta * es.shininess_factor, 1e-6),
        base3=base3,
        light_dir=np.asarray(ldir, dtype=np.float64),
        light_spec=light.specular_color * light.specular_scale,
        light_amb=light.ambient_scale,
        light_diff=light.diffuse_scale,
        opacity_clamped=(o_raw > 1.0) | (o_raw < 0.0),
    )


def resolve_composed(scene: BasicSceneModel | ComposedScene, light: LightConfig):
    comp = as_composed(scene)
    scenes = comp.visible_scenes()
    return scenes, [resolve_effective(s, light) for s in scenes]
