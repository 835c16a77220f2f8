"""Color models: spherical-harmonic view-dependent color and Blinn-Phong."""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError
from .scene import LightConfig

SH_C0 = 0.28209479177387814
SH_C1 = 0.4886025119029199
SH_C2 = (
    1.0925484305920792,
    -1.0925484305920792,
    0.31539156525252005,
    -1.0925484305920792,
    0.5462742152960396,
)
SH_C3 = (
    -0.5900435899266435,
    2.890611442640554,
    -0.4570457994644658,
    0.3731763325901154,
    -0.4570457994644658,
    1.445305721320277,
    -0.5900435899266435,
)

SH_OFFSET = 0.5  # added to the summed basis so zero coefficients render mid-gray


def sh_basis(dirs: np.ndarray, degree: int) -> np.ndarray:
    """Real SH basis values for unit directions, shape (..., (degree+1)^2)."""
    if degree < 0 or degree > 3:
        raise InvalidParameterError("SH degree must be in [0, 3]")
    dirs = np.asarray(dirs, dtype=np.float64)
    x, y, z = dirs[..., 0], dirs[..., 1], dirs[..., 2]
    out = [np.full(x.shape, SH_C0)]
    if degree >= 1:
        out += [-SH_C1 * y, SH_C1 * z, -SH_C1 * x]
    if degree >= 2:
        xx, yy, zz = x * x, y * y, z * z
        out += [
            SH_C2[0] * x * y,
            SH_C2[1] * y * z,
            SH_C2[2] * (2.0 * zz - xx - yy),
            SH_C2[3] * x * z,
            SH_C2[4] * (xx - yy),
        ]
    if degree >= 3:
        xx, yy, zz = x * x, y * y, z * z
        out += [
            SH_C3[0] * y * (3.0 * xx - yy),
            SH_C3[1] * x * y * z,
            SH_C3[2] * y * (4.0 * zz - xx - yy),
            SH_C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy),
            SH_C3[4] * x * (4.0 * zz - xx - yy),
            SH_C3[5] * z * (xx - yy),
            SH_C3[6] * x * (xx - yy),
        ]
    return np.stack(out, axis=-1)


def sh_basis_grad(dirs: np.ndarray, degree: int) -> np.ndarray:
    """d basis / d direction for unit directions, shape (..., K, 3)."""
    dirs = np.asarray(dirs, dtype=np.float64)
    x, y, z = dirs[..., 0], dirs[..., 1], dirs[..., 2]
    zero = np.zeros_like(x)
    rows = [np.stack([zero, zero, zero], axis=-1)]
    if degree >= 1:
        one = np.ones_like(x)
        rows += [
            np.stack([zero, -SH_C1 * one, zero], axis=-1),
            np.stack([zero, zero, SH_C1 * one], axis=-1),
            np.stack([-SH_C1 * one, zero, zero], axis=-1),
        ]
    if degree >= 2:
        rows += [
            np.stack([SH_C2[0] * y, SH_C2[0] * x, zero], axis=-1),
            np.stack([zero, SH_C2[1] * z, SH_C2[1] * y], axis=-1),
            np.stack([-2 * SH_C2[2] * x, -2 * SH_C2[2] * y, 4 * SH_C2[2] * z], axis=-1),
            np.stack([SH_C2[3] * z, zero, SH_C2[3] * x], axis=-1),
            np.stack([2 * SH_C2[4] * x, -2 * SH_C2[4] * y, zero], axis=-1),
        ]
    if degree >= 3:
        xx, yy, zz = x * x, y * y, z * z
        rows += [
            np.stack([SH_C3[0] * 6 * x * y, SH_C3[0] * (3 * xx - 3 * yy), zero], axis=-1),
            np.stack([SH_C3[1] * y * z, SH_C3[1] * x * z, SH_C3[1] * x * y], axis=-1),
            np.stack([-2 * SH_C3[2] * x * y, SH_C3[2] * (4 * zz - xx - 3 * yy), SH_C3[2] * 8 * y * z], axis=-1),
            np.stack([-6 * SH_C3[3] * x * z, -6 * SH_C3[3] * y * z, SH_C3[3] * (6 * zz - 3 * xx - 3 * yy)], axis=-1),
            np.stack([SH_C3[4] * (4 * zz - 3 * xx - yy), -2 * SH_C3[4] * x * y, SH_C3[4] * 8 * x * z], axis=-1),
            np.stack([2 * SH_C3[5] * x * z, -2 * SH_C3[5] * y * z, SH_C3[5] * (xx - yy)], axis=-1),
            np.stack([SH_C3[6] * (3 * xx - yy), -2 * SH_C3[6] * x * y, zero], axis=-1),
        ]
    return np.stack(rows, axis=-2)


def eval_sh(sh: np.ndarray, view_dir: np.ndarray) -> np.ndarray:
    """View-dependent RGB from SH coefficients; clamped at 0 after the DC offset.

    ``sh`` is (K, 3) or (N, K, 3) with K = (degree+1)^2 <= 16; ``view_dir`` is a
    matching unit direction (3,) or (N, 3).
    """
    sh = np.asarray(sh, dtype=np.float64)
    k = sh.shape[-2]
    degree = int(round(np.sqrt(k))) - 1
    if (degree + 1) ** 2 != k:
        raise InvalidParameterError(f"SH coefficient count {k} is not a square")
    basis = sh_basis(view_dir, degree)
    color = np.einsum("...k,...kc->...c", basis, sh) + SH_OFFSET
    return np.maximum(color, 0.0)


def shade_blinn_phong(
    k_a: float,
    k_d: float,
    k_s: float,
    beta: float,
    c_base: np.ndarray,
    normal: np.ndarray,
    light: LightConfig,
    view_dir: np.ndarray,
) -> np.ndarray:
    """Blinn-Phong color at a surface point.

    ``view_dir`` points from the camera toward the surface; ``light.direction``
    points from the surface toward the light. Ambient and diffuse share
    ``c_base``; the specular light color is ``light.specular_color``. The
    diffuse/specular terms use |n.l| (two-sided surfels) and the specular term
    vanishes when the halfway vector is undefined (v + l = 0).
    """
    n = np.asarray(normal, dtype=np.float64)
    l = light.direction
    v = -np.asarray(view_dir, dtype=np.float64)  # toward the viewer
    ndl = abs(float(np.dot(n, l)))
    c = k_a * light.ambient_scale * np.asarray(c_base, dtype=np.float64)
    c = c + k_d * light.diffuse_scale * np.asarray(c_base, dtype=np.float64) * ndl
    if ndl > 0.0:
        h = v + l
        hn = np.linalg.norm(h)
        if hn > 1e-9:
            ndh = abs(float(np.dot(n, h / hn)))
            c = c + k_s * light.specular_scale * light.specular_color * (ndh ** beta)
    return np.maximum(c, 0.0)
