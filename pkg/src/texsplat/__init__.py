"""texsplat: textured, relightable 2D Gaussian surfel scenes.

Fit surfel scenes to multi-view images, edit them photometrically in real
time, stylize them from image or text-editing prompts, segment them from 2D
masks, and serve them interactively.
"""

from .scene import (
    BasicSceneModel,
    ComposedScene,
    EditState,
    LightConfig,
    SurfelPrimitive,
    TextureMap,
    allocate_texels,
    compose,
    derive_frame,
    sample_texture,
)
from .cameras import CameraView, icosphere_cameras
from .raster import RenderMode, RenderTargets, render, render_reference
from .shading import eval_sh, shade_blinn_phong

__version__ = "0.1.0"

__all__ = [
    "BasicSceneModel",
    "CameraView",
    "ComposedScene",
    "EditState",
    "LightConfig",
    "RenderMode",
    "RenderTargets",
    "SurfelPrimitive",
    "TextureMap",
    "allocate_texels",
    "compose",
    "derive_frame",
    "eval_sh",
    "icosphere_cameras",
    "render",
    "render_reference",
    "sample_texture",
    "shade_blinn_phong",
    "__version__",
]
