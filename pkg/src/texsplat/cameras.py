"""Pinhole cameras and view-sphere sampling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError
from .geometry import look_at_c2w

ICOSPHERE_COUNTS = (12, 42, 162, 642)


@dataclass
class CameraView:
    """Pinhole camera (OpenCV axes: x right, y down, z forward).

    Pixel (col, row) samples the ray through continuous image coordinates
    (col, row); a camera-space point (0, 0, d) with d > near projects to the
    principal point (cx, cy).
    """

    width: int
    height: int
    fx: float
    fy: float
    cx: float
    cy: float
    c2w: np.ndarray = field(default_factory=lambda: np.eye(4))
    near: float = 0.01
    far: float = 1e4

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise InvalidParameterError("image dimensions must be positive")
        self.c2w = np.asarray(self.c2w, dtype=np.float64).reshape(4, 4)
        if not np.all(np.isfinite(self.c2w)):
            raise InvalidParameterError("camera transform must be finite")

    @classmethod
    def from_fov(cls, width: int, height: int, fov_y_deg: float, c2w: np.ndarray,
                 near: float = 0.01, far: float = 1e4) -> "CameraView":
        fy = 0.5 * height / np.tan(0.5 * np.deg2rad(fov_y_deg))
        return cls(width=width, height=height, fx=fy, fy=fy,
                   cx=(width - 1) / 2.0, cy=(height - 1) / 2.0, c2w=c2w, near=near, far=far)

    @property
    def position(self) -> np.ndarray:
        return self.c2w[:3, 3]

    @property
    def rotation(self) -> np.ndarray:
        return self.c2w[:3, :3]

    def w2c(self) -> np.ndarray:
        R = self.rotation
        out = np.eye(4)
        out[:3, :3] = R.T
        out[:3, 3] = -R.T @ self.position
        return out

    def cam_depth(self, points: np.ndarray) -> np.ndarray:
        """Camera-space z of world points, shape (..., 3) -> (...)."""
        return (points - self.position) @ self.rotation[:, 2]

    def project(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """World points -> (px, py, z_cam); callers guard z_cam > 0."""
        pc = (points - self.position) @ self.rotation
        z = pc[..., 2]
        px = self.fx * pc[..., 0] / z + self.cx
        py = self.fy * pc[..., 1] / z + self.cy
        return px, py, z

    def ray_directions(self, px: np.ndarray, py: np.ndarray) -> np.ndarray:
        """World-space unnormalized ray directions for image coordinates."""
        d = np.stack(
            [(px - self.cx) / self.fx, (py - self.cy) / self.fy, np.ones_like(np.asarray(px, dtype=np.float64))],
            axis=-1,
        )
        return d @ self.rotation.T

    def resized(self, width: int, height: int) -> "CameraView":
        sx = width / self.width
        sy = height / self.height
        return CameraView(width=width, height=height, fx=self.fx * sx, fy=self.fy * sy,
                          cx=(self.cx + 0.5) * sx - 0.5, cy=(self.cy + 0.5) * sy - 0.5,
                          c2w=self.c2w.copy(), near=self.near, far=self.far)


def icosphere_vertices(level: int) -> np.ndarray:
    """Unit-sphere vertices of an icosphere after ``level`` subdivisions."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = [
        (-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0),
        (0, -1, phi), (0, 1, phi), (0, -1, -phi), (0, 1, -phi),
        (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [np.array(v, dtype=np.float64) / np.linalg.norm(v) for v in verts]

    for _ in range(level):
        midpoint_cache: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key in midpoint_cache:
                return midpoint_cache[key]
            m = verts[a] + verts[b]
            m = m / np.linalg.norm(m)
            verts.append(m)
            midpoint_cache[key] = len(verts) - 1
            return midpoint_cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces

    pts = np.stack(verts)
    # deterministic ordering independent of construction order
    order = np.lexsort((pts[:, 2].round(9), pts[:, 1].round(9), pts[:, 0].round(9)))
    return pts[order]


def fibonacci_sphere(count: int) -> np.ndarray:
    """Near-uniform unit-sphere points via the golden-angle spiral."""
    i = np.arange(count, dtype=np.float64)
    ga = np.pi * (3.0 - np.sqrt(5.0))
    z = 1.0 - (2.0 * i + 1.0) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    theta = ga * i
    return np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=1)


def sphere_points(count: int) -> np.ndarray:
    if count in ICOSPHERE_COUNTS:
        level = ICOSPHERE_COUNTS.index(count)
        return icosphere_vertices(level)
    return fibonacci_sphere(count)


def icosphere_cameras(
    count: int,
    radius: float,
    look_at: np.ndarray | None = None,
    width: int = 512,
    height: int = 512,
    fov_y_deg: float = 40.0,
    near: float = 0.01,
    far: float = 1e4,
) -> list[CameraView]:
    """Cameras on a view sphere looking at a common target.

    Exact icosphere levels exist for counts 12/42/162/642; any other count
    falls back to Fibonacci-sphere sampling.
    """
    if count < 2:
        raise InvalidParameterError("need at least 2 cameras")
    target = np.zeros(3) if look_at is None else np.asarray(look_at, dtype=np.float64)
    pts = sphere_points(count) * radius + target
    cams = []
    for p in pts:
        c2w = look_at_c2w(p, target)
        cams.append(CameraView.from_fov(width, height, fov_y_deg, c2w, near=near, far=far))
    return cams
