"""SSIM with an 11x11 sigma-1.5 Gaussian window and an exact gradient.

Window convolutions use zero padding, which makes the (symmetric, separable)
convolution operator self-adjoint, so the hand-derived gradient below is
exact rather than approximate at the borders.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve1d

WINDOW = 11
SIGMA = 1.5
C1 = 0.01**2
C2 = 0.03**2


def gaussian_window(size: int = WINDOW, sigma: float = SIGMA) -> np.ndarray:
    r = np.arange(size) - (size - 1) / 2.0
    k = np.exp(-0.5 * (r / sigma) ** 2)
    return k / k.sum()


_KERNEL = gaussian_window()


def _blur(x: np.ndarray) -> np.ndarray:
    """Separable zero-padded Gaussian filter over the two leading axes."""
    out = convolve1d(x, _KERNEL, axis=0, mode="constant", cval=0.0)
    return convolve1d(out, _KERNEL, axis=1, mode="constant", cval=0.0)


def ssim(x: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean SSIM over pixels and channels, plus the per-pixel SSIM map."""
    if x.ndim == 2:
        x = x[..., None]
        y = y[..., None]
    mx = _blur(x)
    my = _blur(y)
    sxx = _blur(x * x) - mx * mx
    syy = _blur(y * y) - my * my
    sxy = _blur(x * y) - mx * my
    a1 = 2.0 * mx * my + C1
    a2 = 2.0 * sxy + C2
    b1 = mx * mx + my * my + C1
    b2 = sxx + syy + C2
    smap = (a1 * a2) / (b1 * b2)
    return float(smap.mean()), smap


def ssim_grad(x: np.ndarray, y: np.ndarray, upstream: float = 1.0) -> np.ndarray:
    """d(mean SSIM)/dx, scaled by ``upstream``; shape matches x."""
    squeeze = x.ndim == 2
    if squeeze:
        x = x[..., None]
        y = y[..., None]
    mx = _blur(x)
    my = _blur(y)
    sxx = _blur(x * x) - mx * mx
    syy = _blur(y * y) - my * my
    sxy = _blur(x * y) - mx * my
    a1 = 2.0 * mx * my + C1
    a2 = 2.0 * sxy + C2
    b1 = mx * mx + my * my + C1
    b2 = sxx + syy + C2
    denom = b1 * b2
    w = upstream / x.size  # mean reduction
    ds_dmx = w * (2.0 * my * a2 / denom - 2.0 * mx * a1 * a2 / (b1 * denom))
    ds_dsxx = w * (-(a1 * a2) / (b2 * denom))
    ds_dsxy = w * (2.0 * a1 / denom)
    grad = (
        _blur(ds_dmx)
        + 2.0 * x * _blur(ds_dsxx)
        - 2.0 * _blur(mx * ds_dsxx)
        + y * _blur(ds_dsxy)
        - _blur(my * ds_dsxy)
    )
    return grad[..., 0] if squeeze else grad
