"""Scalar contract operations for single ray-splat queries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cameras import CameraView
from ..geometry import quat_normalize, quat_to_rotation
from ..scene import SurfelPrimitive
from .constants import ALPHA_CULL, DENOM_EPS, LOWPASS_SIGMA_PX


@dataclass
class SplatHit:
    u: float
    v: float
    depth: float
    p_local: np.ndarray


def ray_splat_intersect(prim: SurfelPrimitive, camera: CameraView, pixel: tuple[float, float]) -> SplatHit | None:
    """Ray-splat intersection in the surfel coordinate system.

    Returns None when the ray is parallel to the splat plane or the hit falls
    outside the camera's depth range. ``u``/``v`` are the splat-frame
    coordinates (world offset over scale), so p_local = u s_u t_u + v s_v t_v.
    """
    R = quat_to_rotation(quat_normalize(prim.rot))
    t_u, t_v, n = R[:, 0], R[:, 1], R[:, 2]
    d = camera.ray_directions(np.float64(pixel[0]), np.float64(pixel[1]))
    dn = np.linalg.norm(d)
    w = d / dn
    denom = float(np.dot(w, n))
    if abs(denom) < DENOM_EPS:
        return None
    m = prim.mu - camera.position
    t_ray = float(np.dot(m, n)) / denom
    depth = t_ray / dn
    if depth <= camera.near or depth >= camera.far:
        return None
    p_local = t_ray * w - m
    return SplatHit(
        u=float(np.dot(t_u, p_local)) / prim.s_u,
        v=float(np.dot(t_v, p_local)) / prim.s_v,
        depth=depth,
        p_local=p_local,
    )


def splat_weight(u: float, v: float, screen_dist_px: float | None = None) -> float:
    """Gaussian splat weight, floored by the 0.3-pixel screen-space low-pass."""
    g = float(np.exp(-0.5 * (u * u + v * v)))
    if screen_dist_px is not None:
        gl = float(np.exp(-(screen_dist_px**2) / (2.0 * LOWPASS_SIGMA_PX**2)))
        g = max(g, gl)
    return g


def is_culled(opacity: float, weight: float) -> bool:
    return opacity * weight < ALPHA_CULL
