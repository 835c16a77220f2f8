"""Multi-view dataset loading: images/ directory plus a JSON cameras manifest.

Manifest fields: width, height, fx, fy, cx, cy, near, far, background (RGB),
train/test index lists, and frames = [{"file": ..., "c2w": [16 floats,
row-major]}]. Images decode to linear [0,1] float RGBA; the alpha channel is
the coverage ground truth for the alpha reconstruction loss.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..cameras import CameraView
from ..errors import (
    DimensionMismatchError,
    EmptyDatasetError,
    MissingManifestError,
    UnreadableImageError,
)
from .images import read_image, write_image

MANIFEST_NAME = "cameras.json"


@dataclass
class MultiViewDataset:
    images: list[np.ndarray]  # linear RGBA float arrays, identical shapes
    cameras: list[CameraView]
    background: np.ndarray = field(default_factory=lambda: np.zeros(3))
    train_indices: list[int] = field(default_factory=list)
    test_indices: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.images)

    @property
    def height(self) -> int:
        return self.images[0].shape[0]

    @property
    def width(self) -> int:
        return self.images[0].shape[1]

    def split(self, which: str) -> list[int]:
        idx = self.train_indices if which == "train" else self.test_indices
        return list(idx) if idx else list(range(len(self)))

    def mean_foreground_color(self) -> np.ndarray:
        """Alpha-weighted mean RGB over training views (palette initializer)."""
        num = np.zeros(3)
        den = 0.0
        for i in self.split("train"):
            img = self.images[i]
            a = img[..., 3]
            num += (img[..., :3] * a[..., None]).sum(axis=(0, 1))
            den += a.sum()
        return num / max(den, 1e-9)


def load_dataset(path: str | Path) -> MultiViewDataset:
    root = Path(path)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.exists():
        raise MissingManifestError(f"no {MANIFEST_NAME} in {root}")
    try:
        manifest = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise MissingManifestError(f"malformed manifest: {exc}") from exc
    frames = manifest.get("frames", [])
    if not frames:
        raise EmptyDatasetError(f"manifest {manifest_path} lists no frames")

    width = int(manifest["width"])
    height = int(manifest["height"])
    images, cameras = [], []
    for fr in frames:
        fpath = root / fr["file"]
        if not fpath.exists():
            raise UnreadableImageError(f"frame file missing: {fr['file']}")
        img = read_image(fpath)
        if img.shape[0] != height or img.shape[1] != width:
            raise DimensionMismatchError(
                f"{fr['file']}: image is {img.shape[1]}x{img.shape[0]}, manifest says {width}x{height}"
            )
        c2w = np.asarray(fr["c2w"], dtype=np.float64).reshape(4, 4)
        if not np.all(np.isfinite(c2w)):
            raise DimensionMismatchError(f"{fr['file']}: non-finite camera matrix")
        images.append(img)
        cameras.append(
            CameraView(
                width=width, height=height,
                fx=float(manifest["fx"]), fy=float(manifest["fy"]),
                cx=float(manifest["cx"]), cy=float(manifest["cy"]),
                c2w=c2w,
                near=float(manifest.get("near", 0.01)), far=float(manifest.get("far", 1e4)),
            )
        )
    return MultiViewDataset(
        images=images,
        cameras=cameras,
        background=np.asarray(manifest.get("background", [0.0, 0.0, 0.0]), dtype=np.float64),
        train_indices=list(manifest.get("train", [])),
        test_indices=list(manifest.get("test", [])),
    )


def write_dataset(dataset: MultiViewDataset, path: str | Path) -> MultiViewDataset:
    """Write images + manifest; returns the dataset re-loaded from disk.

    Reloading makes the in-memory arrays the file-quantized values, so a
    subsequent load is bit-identical.
    """
    root = Path(path)
    (root / "images").mkdir(parents=True, exist_ok=True)
    frames = []
    for i, (img, cam) in enumerate(zip(dataset.images, dataset.cameras)):
        name = f"images/{i:04d}.png"
        write_image(root / name, img)
        frames.append({"file": name, "c2w": [float(x) for x in cam.c2w.reshape(-1)]})
    cam0 = dataset.cameras[0]
    manifest = {
        "width": cam0.width, "height": cam0.height,
        "fx": cam0.fx, "fy": cam0.fy, "cx": cam0.cx, "cy": cam0.cy,
        "near": cam0.near, "far": cam0.far,
        "background": [float(x) for x in dataset.background],
        "train": dataset.train_indices, "test": dataset.test_indices,
        "frames": frames,
    }
    (root / MANIFEST_NAME).write_text(json.dumps(manifest, indent=1))
    return load_dataset(root)
