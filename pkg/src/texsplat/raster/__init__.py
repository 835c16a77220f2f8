from .targets import RenderMode, RenderTargets
from .tiled import render
from .reference import render_reference
from .prep import flatten_view
from .ops import ray_splat_intersect, splat_weight

__all__ = [
    "RenderMode",
    "RenderTargets",
    "render",
    "render_reference",
    "flatten_view",
    "ray_splat_intersect",
    "splat_weight",
]
