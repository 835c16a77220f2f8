"""Binary mask loading for 2D-lift-3D segmentation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import MaskError
from .dataset import MultiViewDataset


@dataclass
class MaskSet:
    """Per-view binary masks (values {0, 1}), keyed by dataset view index."""

    masks: dict[int, np.ndarray]


def load_masks(path: str | Path, dataset: MultiViewDataset) -> MaskSet:
    """Load ``<view_id>.png`` single-channel masks (pixel values 0 or 255)."""
    root = Path(path)
    masks: dict[int, np.ndarray] = {}
    files = sorted(root.glob("*.png"))
    if not files:
        raise MaskError(f"no mask files in {root}")
    for f in files:
        try:
            view_id = int(f.stem)
        except ValueError as exc:
            raise MaskError(f"mask file name {f.name!r} is not a view id") from exc
        if view_id < 0 or view_id >= len(dataset):
            raise MaskError(f"mask {f.name} refers to view {view_id}, dataset has {len(dataset)}")
        try:
            with Image.open(f) as im:
                arr = np.asarray(im.convert("L"))
        except (UnidentifiedImageError, OSError) as exc:
            raise MaskError(f"cannot read mask {f}: {exc}") from exc
        cam = dataset.cameras[view_id]
        if arr.shape != (cam.height, cam.width):
            raise MaskError(
                f"mask {f.name} is {arr.shape[1]}x{arr.shape[0]}, view {view_id} is {cam.width}x{cam.height}"
            )
        values = np.unique(arr)
        if not np.all(np.isin(values, (0, 255))):
            bad = [int(v) for v in values if v not in (0, 255)]
            raise MaskError(f"mask {f.name} has non-binary values {bad[:5]}")
        masks[view_id] = (arr == 255).astype(np.uint8)
    return MaskSet(masks)


def write_mask(path: str | Path, mask: np.ndarray) -> None:
    data = (np.asarray(mask) > 0).astype(np.uint8) * 255
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(data, mode="L").save(path)
