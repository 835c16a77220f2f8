"""Render outputs and mode selection."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class RenderMode(enum.Enum):
    """Per-splat color source; geometry and compositing are mode-independent."""

    SHADED = "shaded"  # Blinn-Phong on the view-independent base color
    FLAT = "flat"  # base color only, no lighting
    NORMAL = "normal"  # camera-facing world normal
    DEPTH = "depth"  # camera-space intersection depth
    TEXTURE = "texture"  # texture offset color alone
    SH = "sh"  # spherical-harmonic view-dependent color (pre-shading phases)

    @classmethod
    def parse(cls, name: str) -> "RenderMode":
        for m in cls:
            if m.value == name:
                return m
        raise ValueError(f"unknown render mode {name!r}")


MODE_IDS = {m: i for i, m in enumerate(RenderMode)}


@dataclass
class RenderTargets:
    """Per-pixel outputs of one render pass (premultiplied compositing sums)."""

    color: np.ndarray  # (H, W, 3), includes background under residual T
    alpha: np.ndarray  # (H, W)
    depth: np.ndarray  # (H, W)
    normal: np.ndarray  # (H, W, 3)
    tex_color: np.ndarray  # (H, W, 3)
    k_maps: np.ndarray  # (H, W, 4): K_a, K_d, K_s, B

    @classmethod
    def zeros(cls, height: int, width: int) -> "RenderTargets":
        return cls(
            color=np.zeros((height, width, 3)),
            alpha=np.zeros((height, width)),
            depth=np.zeros((height, width)),
            normal=np.zeros((height, width, 3)),
            tex_color=np.zeros((height, width, 3)),
            k_maps=np.zeros((height, width, 4)),
        )
