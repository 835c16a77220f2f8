"""Reverse-mode gradients through the full render + loss stack.

Flow: the tiled kernel renders the targets, numpy computes losses and their
gradients with respect to the output maps, and the backward kernel pushes the
map gradients through compositing, shading, UV mapping and sampling back to
per-primitive parameters. The quaternion and per-view SH chains finish in
numpy (rotation columns -> quaternion, SH color -> coefficients and mu).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cameras import CameraView
from ..errors import ContractViolationError
from ..scene import BasicSceneModel, LightConfig, sigmoid
from ..shading import sh_basis_grad
from ..raster import kernels
from ..raster.prep import FlatView, flatten_view
from ..raster.targets import RenderMode, RenderTargets
from ..raster.tiled import render_flat
from .losses import loss_bilateral, loss_normal_consistency, loss_photometric, loss_sparsity


@dataclass
class FreezeSpec:
    """Which attribute families receive zero gradient."""

    geometry: bool = False  # mu, quat, scales
    opacity: bool = False
    sh: bool = False
    shading: bool = False  # k_a, k_d, k_s, beta, c_ind
    texture: bool = False
    palette: bool = False

    @classmethod
    def phase1(cls) -> "FreezeSpec":
        return cls(shading=True, texture=True, palette=True)

    @classmethod
    def phase2(cls) -> "FreezeSpec":
        return cls(sh=True, texture=True, palette=True)

    @classmethod
    def phase3(cls) -> "FreezeSpec":
        return cls(geometry=True, opacity=True, sh=True, shading=True)

    @classmethod
    def texture_only(cls) -> "FreezeSpec":
        return cls(geometry=True, opacity=True, sh=True, shading=True, palette=True)


@dataclass
class GradientBundle:
    """Gradients mirroring a scene's optimizable attributes."""

    mu: np.ndarray
    quat: np.ndarray
    log_su: np.ndarray
    log_sv: np.ndarray
    opacity_logit: np.ndarray
    c_ind: np.ndarray
    sh: np.ndarray | None
    k_a: np.ndarray
    k_d: np.ndarray
    k_s: np.ndarray
    beta: np.ndarray
    texels: np.ndarray | None
    palette: np.ndarray

    @classmethod
    def zeros_like(cls, scene: BasicSceneModel) -> "GradientBundle":
        return cls(
            mu=np.zeros_like(scene.mu),
            quat=np.zeros_like(scene.quat),
            log_su=np.zeros_like(scene.log_su),
            log_sv=np.zeros_like(scene.log_sv),
            opacity_logit=np.zeros_like(scene.opacity_logit),
            c_ind=np.zeros_like(scene.c_ind),
            sh=None if scene.sh is None else np.zeros_like(scene.sh),
            k_a=np.zeros_like(scene.k_a),
            k_d=np.zeros_like(scene.k_d),
            k_s=np.zeros_like(scene.k_s),
            beta=np.zeros_like(scene.beta),
            texels=None if scene.texels is None else np.zeros_like(scene.texels),
            palette=np.zeros(3),
        )

    def scaled(self, s: float) -> "GradientBundle":
        out = GradientBundle(**{k: (v * s if isinstance(v, np.ndarray) else v) for k, v in self.__dict__.items()})
        return out

    def apply_freeze(self, freeze: FreezeSpec) -> "GradientBundle":
        if freeze.geometry:
            self.mu[:] = 0.0
            self.quat[:] = 0.0
            self.log_su[:] = 0.0
            self.log_sv[:] = 0.0
        if freeze.opacity:
            self.opacity_logit[:] = 0.0
        if freeze.sh and self.sh is not None:
            self.sh[:] = 0.0
        if freeze.shading:
            self.c_ind[:] = 0.0
            self.k_a[:] = 0.0
            self.k_d[:] = 0.0
            self.k_s[:] = 0.0
            self.beta[:] = 0.0
        if freeze.texture and self.texels is not None:
            self.texels[:] = 0.0
        if freeze.palette:
            self.palette[:] = 0.0
        return self


@dataclass
class MapGrads:
    """Upstream gradients on the rendered output maps."""

    color: np.ndarray
    alpha: np.ndarray
    depth: np.ndarray
    normal: np.ndarray
    tex_color: np.ndarray
    k_maps: np.ndarray

    @classmethod
    def zeros(cls, height: int, width: int) -> "MapGrads":
        return cls(
            color=np.zeros((height, width, 3)),
            alpha=np.zeros((height, width)),
            depth=np.zeros((height, width)),
            normal=np.zeros((height, width, 3)),
            tex_color=np.zeros((height, width, 3)),
            k_maps=np.zeros((height, width, 4)),
        )


@dataclass
class LossReport:
    total: float
    terms: dict = field(default_factory=dict)


def quat_grad_from_rotation_grads(quat: np.ndarray, g_tu, g_tv, g_n) -> np.ndarray:
    """Chain column gradients of R(q_hat) to the raw quaternion."""
    q = quat / np.linalg.norm(quat, axis=1, keepdims=True)
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    # gR[r, c]: c=0 -> t_u, c=1 -> t_v, c=2 -> n
    g = np.zeros((quat.shape[0], 3, 3))
    g[:, :, 0] = g_tu
    g[:, :, 1] = g_tv
    g[:, :, 2] = g_n
    gw = 2.0 * (
        -z * g[:, 0, 1] + y * g[:, 0, 2]
        + z * g[:, 1, 0] - x * g[:, 1, 2]
        - y * g[:, 2, 0] + x * g[:, 2, 1]
    )
    gx = 2.0 * (
        y * g[:, 0, 1] + z * g[:, 0, 2]
        + y * g[:, 1, 0] - 2 * x * g[:, 1, 1] - w * g[:, 1, 2]
        + z * g[:, 2, 0] + w * g[:, 2, 1] - 2 * x * g[:, 2, 2]
    )
    gy = 2.0 * (
        -2 * y * g[:, 0, 0] + x * g[:, 0, 1] + w * g[:, 0, 2]
        + x * g[:, 1, 0] + z * g[:, 1, 2]
        - w * g[:, 2, 0] + z * g[:, 2, 1] - 2 * y * g[:, 2, 2]
    )
    gz = 2.0 * (
        -2 * z * g[:, 0, 0] - w * g[:, 0, 1] + x * g[:, 0, 2]
        + w * g[:, 1, 0] - 2 * z * g[:, 1, 1] + y * g[:, 1, 2]
        + x * g[:, 2, 0] + y * g[:, 2, 1]
    )
    ghat = np.stack([gw, gx, gy, gz], axis=1)
    norms = np.linalg.norm(quat, axis=1, keepdims=True)
    return (ghat - q * np.einsum("nk,nk->n", q, ghat)[:, None]) / norms


def backward(
    scene: BasicSceneModel,
    camera: CameraView,
    targets: RenderTargets | None,
    map_grads: MapGrads,
    mode: RenderMode,
    light: LightConfig | None = None,
    freeze: FreezeSpec | None = None,
    flat: FlatView | None = None,
    background: np.ndarray | None = None,
) -> GradientBundle:
    """Exact gradients of sum(map_grads * maps) w.r.t. scene parameters."""
    if targets is None:
        raise ContractViolationError("backward requires the forward render targets")
    if targets.color.shape[:2] != (camera.height, camera.width):
        raise ContractViolationError("forward intermediates do not match the camera")
    if flat is None:
        flat = flatten_view(scene, camera, mode=mode, light=light, need_sh_backward=True)
    bg = np.zeros(3) if background is None else np.asarray(background, dtype=np.float64)

    M = flat.mu.shape[0]
    g_mu = np.zeros((M, 3))
    g_tu = np.zeros((M, 3))
    g_tv = np.zeros((M, 3))
    g_n = np.zeros((M, 3))
    g_logsu = np.zeros(M)
    g_logsv = np.zeros(M)
    g_oeff = np.zeros(M)
    g_base3 = np.zeros((M, 3))
    g_texels = np.zeros_like(flat.texels)
    g_ka = np.zeros(M)
    g_kd = np.zeros(M)
    g_ks = np.zeros(M)
    g_beta = np.zeros(M)
    g_shrgb = np.zeros((M, 3))

    ray_w, ray_dn = flat.ray_grids()
    kernels.backward_kernel(
        flat.height, flat.width, flat.fx, flat.fy, flat.cx, flat.cy,
        flat.cam_pos, flat.cam_rot, flat.near, flat.far,
        flat.order, flat.bin_offsets, flat.bin_items, flat.item_bbox, flat.tiles_x, flat.tiles_y,
        flat.mu, flat.tu, flat.tv, flat.nrm, flat.su, flat.sv, flat.o_eff, flat.base3,
        flat.textured, flat.tex_u, flat.tex_v, flat.tex_off, flat.tsize, flat.texels,
        flat.k_a, flat.k_d, flat.k_s, flat.beta, flat.ldir, flat.lspec, flat.lamb,
        flat.ldiff, flat.sh_rgb, flat.proj_px, flat.proj_py, flat.cut_half, flat.mode_id, bg,
        targets.color, targets.alpha, targets.depth, targets.normal,
        targets.tex_color, targets.k_maps,
        map_grads.color, map_grads.alpha, map_grads.depth, map_grads.normal,
        map_grads.tex_color, map_grads.k_maps,
        g_mu, g_tu, g_tv, g_n, g_logsu, g_logsv, g_oeff, g_base3, g_texels,
        g_ka, g_kd, g_ks, g_beta, g_shrgb,
        ray_w, ray_dn,
    )

    bundle = GradientBundle.zeros_like(scene)
    es = scene.edit_state

    # SH chain: per-primitive color -> coefficients and view direction -> mu
    if mode is RenderMode.SH and scene.sh is not None:
        masked = g_shrgb * flat.sh_mask
        bundle.sh[:] = flat.sh_basis_vals[:, : scene.sh.shape[1], None] * masked[:, None, :]
        dbasis = sh_basis_grad(flat.sh_dirs, scene.sh_degree())  # (M, K, 3)
        g_dir = np.einsum("nkd,nkc,nc->nd", dbasis, scene.sh, masked)
        dot = np.einsum("nd,nd->n", flat.sh_dirs, g_dir)
        g_mu += (g_dir - flat.sh_dirs * dot[:, None]) / flat.sh_dist[:, None]

    bundle.mu[:] = g_mu
    bundle.quat[:] = quat_grad_from_rotation_grads(scene.quat, g_tu, g_tv, g_n)
    bundle.log_su[:] = g_logsu
    bundle.log_sv[:] = g_logsv
    o = sigmoid(scene.opacity_logit)
    d_oeff = np.where(flat.opacity_clamped, 0.0, es.opacity_factor)
    bundle.opacity_logit[:] = g_oeff * d_oeff * o * (1.0 - o)
    bundle.k_a[:] = g_ka * es.ka_factor
    bundle.k_d[:] = g_kd * es.kd_factor
    bundle.k_s[:] = g_ks * es.ks_factor
    bundle.beta[:] = g_beta * es.shininess_factor

    if scene.has_texture:
        bundle.texels[:] = g_texels
        if scene.uses_palette and es.palette_override is None:
            bundle.palette[:] = g_base3.sum(axis=0)
    else:
        if es.palette_override is None:
            bundle.c_ind[:] = g_base3

    if freeze is not None:
        bundle.apply_freeze(freeze)
    return bundle


@dataclass
class LossWeights:
    lambda_ssim: float = 0.2
    lambda_n: float = 0.0
    lambda_alpha: float = 0.0
    lambda_bilateral: float = 0.0
    lambda_sparsity: float = 0.0


def render_with_loss(
    scene: BasicSceneModel,
    camera: CameraView,
    gt_rgb: np.ndarray,
    gt_alpha: np.ndarray,
    mode: RenderMode,
    weights: LossWeights,
    light: LightConfig | None = None,
    background: np.ndarray | None = None,
    need_backward: bool = True,
):
    """Forward render + loss composition; returns (targets, report, map_grads, flat)."""
    flat = flatten_view(scene, camera, mode=mode, light=light, need_sh_backward=need_backward)
    bg = np.zeros(3) if background is None else np.asarray(background, dtype=np.float64)
    targets = render_flat(flat, bg)
    grads = MapGrads.zeros(camera.height, camera.width)
    terms = {}

    l_c, g_c = loss_photometric(targets.color, gt_rgb, weights.lambda_ssim)
    terms["L_c"] = l_c
    grads.color += g_c
    total = l_c

    if weights.lambda_alpha > 0.0:
        l_a, g_a = loss_photometric(targets.alpha, gt_alpha, weights.lambda_ssim)
        terms["L_alpha"] = l_a
        grads.alpha += weights.lambda_alpha * g_a
        total += weights.lambda_alpha * l_a
    if weights.lambda_n > 0.0:
        l_n, g_d, g_nm, g_al = loss_normal_consistency(
            targets.depth, targets.normal, targets.alpha, camera
        )
        terms["L_n"] = l_n
        grads.depth += weights.lambda_n * g_d
        grads.normal += weights.lambda_n * g_nm
        grads.alpha += weights.lambda_n * g_al
        total += weights.lambda_n * l_n
    if weights.lambda_bilateral > 0.0:
        l_b_total = 0.0
        for j in range(4):
            l_b, g_b = loss_bilateral(targets.k_maps[..., j], gt_rgb)
            grads.k_maps[..., j] += weights.lambda_bilateral * g_b
            l_b_total += l_b
        terms["L_b"] = l_b_total
        total += weights.lambda_bilateral * l_b_total
    if weights.lambda_sparsity > 0.0:
        l_s, g_s = loss_sparsity(targets.tex_color)
        terms["L_sparsity"] = l_s
        grads.tex_color += weights.lambda_sparsity * g_s
        total += weights.lambda_sparsity * l_s

    return targets, LossReport(total=float(total), terms=terms), grads, flat
