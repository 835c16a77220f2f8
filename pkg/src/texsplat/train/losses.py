"""Training losses; each returns its value and the gradient w.r.t. its maps.

All reductions are per-pixel means so loss weights stay resolution-free.
"""

from __future__ import annotations

import numpy as np

from ..cameras import CameraView
from ..errors import InvalidParameterError
from .ssim import ssim, ssim_grad


def loss_l1(x: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    diff = x - y
    return float(np.abs(diff).mean()), np.sign(diff) / diff.size


def loss_photometric(
    rendered: np.ndarray, truth: np.ndarray, lambda_ssim: float = 0.2
) -> tuple[float, np.ndarray]:
    """(1 - l) L1 + l (1 - SSIM)/2 over one channel set (RGB or alpha).

    Returns (value, d value / d rendered).
    """
    if rendered.shape != truth.shape:
        raise InvalidParameterError(f"shape mismatch {rendered.shape} vs {truth.shape}")
    l1, g = loss_l1(rendered, truth)
    value = (1.0 - lambda_ssim) * l1
    grad = (1.0 - lambda_ssim) * g
    if lambda_ssim > 0.0:
        s, _ = ssim(rendered, truth)
        value += lambda_ssim * (1.0 - s) / 2.0
        grad = grad + ssim_grad(rendered, truth, upstream=-lambda_ssim / 2.0)
    return value, grad


def loss_sparsity(tex_map: np.ndarray) -> tuple[float, np.ndarray]:
    """L1 on the rendered texture-offset color map."""
    return float(np.abs(tex_map).mean()), np.sign(tex_map) / tex_map.size


def loss_bilateral(coeff_map: np.ndarray, truth_rgb: np.ndarray) -> tuple[float, np.ndarray]:
    """mean |grad K| * exp(-|grad c_gt|), forward differences.

    Gradient magnitudes are L1 (|dx| + |dy|), channel-summed for the image.
    """
    if coeff_map.shape[:2] != truth_rgb.shape[:2]:
        raise InvalidParameterError("coefficient map / truth size mismatch")
    kx = np.zeros_like(coeff_map)
    ky = np.zeros_like(coeff_map)
    kx[:, :-1] = coeff_map[:, 1:] - coeff_map[:, :-1]
    ky[:-1, :] = coeff_map[1:, :] - coeff_map[:-1, :]
    cx = np.zeros(truth_rgb.shape[:2])
    cy = np.zeros(truth_rgb.shape[:2])
    cx[:, :-1] = np.abs(truth_rgb[:, 1:] - truth_rgb[:, :-1]).sum(axis=-1)
    cy[:-1, :] = np.abs(truth_rgb[1:, :] - truth_rgb[:-1, :]).sum(axis=-1)
    w = np.exp(-(cx + cy))
    value = float(((np.abs(kx) + np.abs(ky)) * w).mean())
    # backward: |kx| routes +-w/size to the two forward-difference taps
    g = np.zeros_like(coeff_map)
    gx = np.sign(kx) * w / coeff_map.size
    gy = np.sign(ky) * w / coeff_map.size
    g[:, 1:] += gx[:, :-1]
    g[:, :-1] -= gx[:, :-1]
    g[1:, :] += gy[:-1, :]
    g[:-1, :] -= gy[:-1, :]
    return value, g


def backproject_rays(camera: CameraView) -> np.ndarray:
    """Unnormalized world ray directions r(x) with P = cam_pos + depth * r."""
    cols, rows = np.meshgrid(
        np.arange(camera.width, dtype=np.float64),
        np.arange(camera.height, dtype=np.float64),
    )
    return camera.ray_directions(cols, rows)


def loss_normal_consistency(
    depth: np.ndarray,
    normal_map: np.ndarray,
    alpha: np.ndarray,
    camera: CameraView,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Agreement between splat normals and depth-derived normals.

    value = mean over pixels of alpha * (1 - n_splat . n_depth), with n_depth
    from central differences of the backprojected point map; border pixels and
    pixels with alpha < 0.5 are excluded. Returns
    (value, d/d depth, d/d normal_map, d/d alpha).
    """
    H, W = depth.shape
    g_depth = np.zeros_like(depth)
    g_normal = np.zeros_like(normal_map)
    g_alpha = np.zeros_like(alpha)
    if H < 3 or W < 3:
        return 0.0, g_depth, g_normal, g_alpha
    rays = backproject_rays(camera)
    P = camera.position + depth[..., None] * rays

    Tx = np.zeros_like(P)
    Ty = np.zeros_like(P)
    Tx[:, 1:-1] = (P[:, 2:] - P[:, :-2]) / 2.0
    Ty[1:-1, :] = (P[2:, :] - P[:-2, :]) / 2.0
    Nraw = np.cross(Tx, Ty)
    nlen = np.linalg.norm(Nraw, axis=-1)
    mlen = np.linalg.norm(normal_map, axis=-1)

    valid = np.zeros((H, W), dtype=bool)
    valid[1:-1, 1:-1] = True
    valid &= (alpha >= 0.5) & (nlen > 1e-12) & (mlen > 1e-9)
    if not valid.any():
        return 0.0, g_depth, g_normal, g_alpha

    safe_n = np.where(nlen[..., None] > 1e-12, nlen[..., None], 1.0)
    safe_m = np.where(mlen[..., None] > 1e-9, mlen[..., None], 1.0)
    N = Nraw / safe_n
    # orient the depth normal toward the camera, like splat normals
    sflip = np.where(np.einsum("hwc,hwc->hw", N, rays) > 0.0, -1.0, 1.0)
    No = sflip[..., None] * N
    ns = normal_map / safe_m

    dot = np.einsum("hwc,hwc->hw", ns, No)
    per_pixel = np.where(valid, alpha * (1.0 - dot), 0.0)
    count = depth.size
    value = float(per_pixel.sum() / count)

    g_alpha[valid] = (1.0 - dot[valid]) / count
    wv = np.where(valid, alpha, 0.0) / count

    # d/d normal_map through its normalization
    gns = -wv[..., None] * No
    g_normal[:] = (gns - ns * np.einsum("hwc,hwc->hw", gns, ns)[..., None]) / safe_m
    g_normal[~valid] = 0.0

    # d/d depth through No <- N <- Nraw <- Tx, Ty <- P <- depth
    gNo = -wv[..., None] * ns
    gN = sflip[..., None] * gNo
    gNraw = (gN - N * np.einsum("hwc,hwc->hw", gN, N)[..., None]) / safe_n
    gNraw[~valid] = 0.0
    gTx = np.cross(Ty, gNraw)
    gTy = np.cross(gNraw, Tx)
    gP = np.zeros_like(P)
    gP[:, 2:] += gTx[:, 1:-1] / 2.0
    gP[:, :-2] -= gTx[:, 1:-1] / 2.0
    gP[2:, :] += gTy[1:-1, :] / 2.0
    gP[:-2, :] -= gTy[1:-1, :] / 2.0
    g_depth[:] = np.einsum("hwc,hwc->hw", gP, rays)
    return value, g_depth, g_normal, g_alpha
