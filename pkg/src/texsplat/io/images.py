"""Lossless image IO: 8-bit RGBA PNG files, linear float arrays in memory."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import UnreadableImageError


def srgb_decode(x: np.ndarray) -> np.ndarray:
    """sRGB-encoded [0,1] -> linear [0,1]."""
    x = np.asarray(x, dtype=np.float64)
    return np.where(x <= 0.04045, x / 12.92, ((x + 0.055) / 1.055) ** 2.4)


def srgb_encode(x: np.ndarray) -> np.ndarray:
    """Linear [0,1] -> sRGB-encoded [0,1]."""
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    return np.where(x <= 0.0031308, 12.92 * x, 1.055 * np.power(x, 1.0 / 2.4) - 0.055)


def read_image(path: str | Path) -> np.ndarray:
    """PNG -> linear float RGBA (H, W, 4); missing alpha becomes 1."""
    try:
        with Image.open(path) as im:
            im = im.convert("RGBA")
            raw = np.asarray(im, dtype=np.float64) / 255.0
    except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
        raise UnreadableImageError(f"cannot read image {path}: {exc}") from exc
    out = np.empty_like(raw)
    out[..., :3] = srgb_decode(raw[..., :3])
    out[..., 3] = raw[..., 3]  # alpha stays linear
    return out


def write_image(path: str | Path, rgba: np.ndarray) -> None:
    """Linear float RGBA (or RGB) -> 8-bit sRGB PNG."""
    rgba = np.asarray(rgba, dtype=np.float64)
    if rgba.ndim == 2:
        rgba = np.repeat(rgba[..., None], 3, axis=-1)
    if rgba.shape[-1] == 3:
        rgba = np.concatenate([rgba, np.ones((*rgba.shape[:2], 1))], axis=-1)
    enc = np.empty_like(rgba)
    enc[..., :3] = srgb_encode(rgba[..., :3])
    enc[..., 3] = np.clip(rgba[..., 3], 0.0, 1.0)
    data = np.round(enc * 255.0).astype(np.uint8)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(data, mode="RGBA").save(path)
