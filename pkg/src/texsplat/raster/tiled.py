"""Tiled forward rendering entry point."""

from __future__ import annotations

import numpy as np

from ..cameras import CameraView
from ..errors import InvalidParameterError
from ..scene import BasicSceneModel, ComposedScene, LightConfig
from .prep import FlatView, SceneFlat, flatten_scene, flatten_view
from .targets import RenderMode, RenderTargets
from . import kernels


def render_flat(flat: FlatView, background: np.ndarray) -> RenderTargets:
    out = RenderTargets.zeros(flat.height, flat.width)
    sf = flat.scene
    kernels.forward_kernel(
        flat.height, flat.width, flat.fx, flat.fy, flat.cx, flat.cy,
        flat.cam_pos, flat.cam_rot, flat.near, flat.far,
        flat.order, flat.bin_offsets, flat.bin_items, flat.item_bbox,
        flat.tiles_x, flat.tiles_y,
        flat.hA, flat.hB, flat.hC, flat.ncam,
        flat.pix_dcx, flat.pix_dcy, flat.pix_inv_dn,
        flat.prim_light, flat.hhat, flat.hvalid,
        sf.nrm, sf.su, sf.sv, sf.o_eff, sf.base3,
        sf.textured, sf.tex_u, sf.tex_v, sf.tex_off, sf.tsize, sf.texels32,
        sf.k_a, sf.k_d, sf.k_s, sf.beta, sf.ldir, sf.lspec, sf.lamb, sf.ldiff,
        flat.sh_rgb, flat.proj_px, flat.proj_py, sf.cut_half, flat.mode_id, background,
        out.color, out.alpha, out.depth, out.normal, out.tex_color, out.k_maps,
    )
    return out


def render(
    scene: BasicSceneModel | ComposedScene,
    camera: CameraView,
    mode: RenderMode = RenderMode.SHADED,
    light: LightConfig | None = None,
    background: np.ndarray | None = None,
    scene_flat: SceneFlat | None = None,
) -> RenderTargets:
    """Render a scene with the tiled software rasterizer.

    Primitives are depth-sorted globally (camera-space depth of mu) and
    composited front to back per pixel; all auxiliary maps share the color
    weights. ``background`` shows through residual transmittance (color only).
    Interactive callers can reuse a :func:`flatten_scene` result across frames
    via ``scene_flat`` as long as the scene and its edit state are unchanged.
    """
    if camera.width <= 0 or camera.height <= 0:
        raise InvalidParameterError("zero-dimension image")
    bg = np.zeros(3) if background is None else np.asarray(background, dtype=np.float64)
    flat = flatten_view(scene, camera, mode=mode, light=light, scene_flat=scene_flat)
    return render_flat(flat, bg)
