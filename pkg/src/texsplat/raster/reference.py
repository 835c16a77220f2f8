"""Naive reference renderer: per-splat loop over the full image, no tiling.

This is the testing oracle for the tiled kernel. It shares only the scene
accessors and the edit-state resolution with the production path; all
geometry, weighting, shading and compositing math is written independently
(vectorized numpy over pixels, one splat at a time, identical culling rules:
o*G < 1/255 skip, T < 1e-4 stop, |denom| < 1e-9 parallel skip).
"""

from __future__ import annotations

import numpy as np

from ..cameras import CameraView
from ..errors import InvalidParameterError
from ..scene import BasicSceneModel, ComposedScene, LightConfig, MIN_SCALE
from ..shading import eval_sh
from .constants import ALPHA_CULL, ALPHA_MAX, DENOM_EPS, LOWPASS_SIGMA_PX, T_STOP
from .effective import resolve_composed
from .targets import RenderMode, RenderTargets


def _bilinear(grid: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Clamped bilinear sampling of a (U, V, 3) grid at (H, W) coordinates."""
    U, V = grid.shape[0], grid.shape[1]
    u = np.clip(u, 0.0, U - 1.0)
    v = np.clip(v, 0.0, V - 1.0)
    u0 = np.minimum(np.floor(u).astype(np.int64), max(U - 2, 0))
    v0 = np.minimum(np.floor(v).astype(np.int64), max(V - 2, 0))
    u1 = np.minimum(u0 + 1, U - 1)
    v1 = np.minimum(v0 + 1, V - 1)
    fu = (u - u0)[..., None]
    fv = (v - v0)[..., None]
    return (
        grid[u0, v0] * (1 - fu) * (1 - fv)
        + grid[u1, v0] * fu * (1 - fv)
        + grid[u0, v1] * (1 - fu) * fv
        + grid[u1, v1] * fu * fv
    )


def render_reference(
    scene: BasicSceneModel | ComposedScene,
    camera: CameraView,
    mode: RenderMode = RenderMode.SHADED,
    light: LightConfig | None = None,
    background: np.ndarray | None = None,
) -> RenderTargets:
    if camera.width <= 0 or camera.height <= 0:
        raise InvalidParameterError("zero-dimension image")
    light = light or LightConfig()
    bg = np.zeros(3) if background is None else np.asarray(background, dtype=np.float64)
    scenes, effs = resolve_composed(scene, light)
    H, W = camera.height, camera.width
    out = RenderTargets.zeros(H, W)

    # gather primitives (same order as concatenation)
    prims = []
    for si, (s, e) in enumerate(zip(scenes, effs)):
        tu_, tv_, n_ = s.frames()
        for i in range(s.num_primitives):
            prims.append((s, e, i, tu_[i], tv_[i], n_[i]))

    cam_pos = camera.position
    z_mu = np.array([camera.cam_depth(p[0].mu[p[2]]) for p in prims]) if prims else np.zeros(0)
    o_all = np.array([p[1].o_eff[p[2]] for p in prims]) if prims else np.zeros(0)
    visible = np.nonzero((z_mu > camera.near) & (z_mu < camera.far) & (o_all > ALPHA_CULL))[0]
    order = visible[np.argsort(z_mu[visible], kind="stable")]

    cols, rows = np.meshgrid(np.arange(W, dtype=np.float64), np.arange(H, dtype=np.float64))
    dirs = camera.ray_directions(cols, rows)  # (H, W, 3) unnormalized
    dn = np.linalg.norm(dirs, axis=-1)
    wdir = dirs / dn[..., None]

    T = np.ones((H, W))
    inv2s2 = 1.0 / (2.0 * LOWPASS_SIGMA_PX**2)

    for idx in order:
        s, e, i, t_u, t_v, nvec = prims[idx]
        o = float(e.o_eff[i])
        denom = wdir @ nvec
        m = s.mu[i] - cam_pos
        not_parallel = np.abs(denom) >= DENOM_EPS
        denom_safe = np.where(not_parallel, denom, 1.0)
        t_ray = float(np.dot(m, nvec)) / denom_safe
        zc = np.where(not_parallel, t_ray / dn, 0.0)
        valid = not_parallel & (zc > camera.near) & (zc < camera.far)
        t_ray = np.where(valid, t_ray, 0.0)
        zc = np.where(valid, zc, 0.0)
        p_local = t_ray[..., None] * wdir - m
        qu = p_local @ t_u
        qv = p_local @ t_v
        s_u = max(float(np.exp(s.log_su[i])), MIN_SCALE)
        s_v = max(float(np.exp(s.log_sv[i])), MIN_SCALE)
        gs = np.exp(-0.5 * ((qu / s_u) ** 2 + (qv / s_v) ** 2))
        px_mu, py_mu, _ = camera.project(s.mu[i])
        gl = np.exp(-((cols - px_mu) ** 2 + (rows - py_mu) ** 2) * inv2s2)
        G = np.maximum(gs, gl)
        a = o * G
        valid &= a >= ALPHA_CULL
        a = np.minimum(a, ALPHA_MAX)
        valid &= T >= T_STOP
        w = np.where(valid, T * a, 0.0)

        # texture sample (zero for untextured primitives)
        if s.has_texture:
            tm = s.texture_map(i)
            ut = qu / s.t_size + (tm.u_dim - 1) / 2.0
            vt = qv / s.t_size + (tm.v_dim - 1) / 2.0
            ctex = _bilinear(tm.texels, ut, vt)
        else:
            ctex = np.zeros((H, W, 3))

        sn = np.where(denom < 0.0, 1.0, -1.0)
        nfl = sn[..., None] * nvec

        if mode in (RenderMode.SHADED, RenderMode.FLAT):
            cb = e.base3[i] + ctex if s.has_texture else np.broadcast_to(e.base3[i], (H, W, 3))
            if mode is RenderMode.SHADED:
                ldir = e.light_dir
                ndl = np.abs(nvec @ ldir)
                coef = e.k_a[i] * e.light_amb + e.k_d[i] * e.light_diff * ndl
                q = coef * cb
                hvec = ldir - wdir  # v_hat + l with v_hat = -w
                hn = np.linalg.norm(hvec, axis=-1)
                ok = (ndl > 0.0) & (hn > 1e-9)
                with np.errstate(divide="ignore", invalid="ignore"):
                    ndh = np.abs((hvec @ nvec)) / hn
                ndh = np.where(ok, ndh, 0.0)
                spec = np.where(ok, e.k_s[i] * ndh ** e.beta[i], 0.0)
                q = q + spec[..., None] * e.light_spec
                q = np.maximum(q, 0.0)
            else:
                q = cb
        elif mode is RenderMode.NORMAL:
            q = nfl
        elif mode is RenderMode.DEPTH:
            q = np.repeat(zc[..., None], 3, axis=-1)
        elif mode is RenderMode.TEXTURE:
            q = ctex
        elif mode is RenderMode.SH:
            if s.sh is None:
                shc = np.full(3, 0.5)
            else:
                d = s.mu[i] - cam_pos
                shc = eval_sh(s.sh[i], d / max(np.linalg.norm(d), 1e-12))
            q = np.broadcast_to(shc, (H, W, 3))
        else:
            raise InvalidParameterError(f"unknown mode {mode}")

        wc = w[..., None]
        out.color += wc * q
        out.depth += w * zc
        out.normal += wc * nfl
        out.tex_color += wc * ctex
        out.k_maps[..., 0] += w * e.k_a[i]
        out.k_maps[..., 1] += w * e.k_d[i]
        out.k_maps[..., 2] += w * e.k_s[i]
        out.k_maps[..., 3] += w * e.beta[i]
        T = np.where(valid, T * (1.0 - a), T)

    out.color += T[..., None] * bg
    out.alpha = 1.0 - T
    return out
