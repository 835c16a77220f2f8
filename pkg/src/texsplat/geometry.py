"""Quaternion and rigid-transform helpers used by scene types and renderers."""

from __future__ import annotations

import numpy as np

from .errors import InvalidParameterError

QUAT_EPS = 1e-12


def normalize(v: np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Unit vector(s) along the last axis; raises on (near-)zero norm."""
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n < eps):
        raise InvalidParameterError("cannot normalize zero-norm vector")
    return v / n


def quat_normalize(q: np.ndarray) -> np.ndarray:
    """Normalize quaternion(s) (w, x, y, z); zero-norm input is an error."""
    q = np.asarray(q, dtype=np.float64)
    n = np.linalg.norm(q, axis=-1, keepdims=True)
    if np.any(n < QUAT_EPS):
        raise InvalidParameterError("zero-norm quaternion")
    return q / n


def quat_to_rotation(q: np.ndarray) -> np.ndarray:
    """Rotation matrices from unit quaternions (w, x, y, z).

    Accepts shape (4,) or (N, 4); returns (3, 3) or (N, 3, 3). Columns of the
    result are the body axes expressed in world coordinates; column 2 equals
    column 0 x column 1 by construction.
    """
    q = np.asarray(q, dtype=np.float64)
    single = q.ndim == 1
    q = np.atleast_2d(q)
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    R = np.empty((q.shape[0], 3, 3), dtype=np.float64)
    R[:, 0, 0] = 1 - 2 * (y * y + z * z)
    R[:, 0, 1] = 2 * (x * y - w * z)
    R[:, 0, 2] = 2 * (x * z + w * y)
    R[:, 1, 0] = 2 * (x * y + w * z)
    R[:, 1, 1] = 1 - 2 * (x * x + z * z)
    R[:, 1, 2] = 2 * (y * z - w * x)
    R[:, 2, 0] = 2 * (x * z - w * y)
    R[:, 2, 1] = 2 * (y * z + w * x)
    R[:, 2, 2] = 1 - 2 * (x * x + y * y)
    return R[0] if single else R


def quat_align_z(direction: np.ndarray) -> np.ndarray:
    """Quaternion rotating +z onto ``direction`` (unit); shortest arc."""
    d = normalize(direction)
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z, d))
    if c > 1.0 - 1e-12:
        return np.array([1.0, 0.0, 0.0, 0.0])
    if c < -1.0 + 1e-12:
        # 180 degrees about x
        return np.array([0.0, 1.0, 0.0, 0.0])
    axis = np.cross(z, d)
    s = np.sqrt((1.0 + c) * 2.0)
    q = np.array([s / 2.0, axis[0] / s, axis[1] / s, axis[2] / s])
    return quat_normalize(q)


def look_at_c2w(eye: np.ndarray, target: np.ndarray, up_hint: np.ndarray | None = None) -> np.ndarray:
    """Camera-to-world matrix, OpenCV convention (x right, y down, z forward)."""
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    fwd = normalize(target - eye)
    if up_hint is None:
        up_hint = np.array([0.0, 1.0, 0.0])
        if abs(float(np.dot(fwd, up_hint))) > 0.999:
            up_hint = np.array([1.0, 0.0, 0.0])
    right = normalize(np.cross(fwd, np.asarray(up_hint, dtype=np.float64)))
    down = np.cross(fwd, right)
    c2w = np.eye(4)
    c2w[:3, 0] = right
    c2w[:3, 1] = down
    c2w[:3, 2] = fwd
    c2w[:3, 3] = eye
    return c2w


def light_direction_from_angles(azimuth_deg: float, elevation_deg: float) -> np.ndarray:
    """Unit light direction from (azimuthal, polar) angles in degrees.

    (0, 0) maps to +z; azimuth rotates about +y, elevation lifts toward +y.
    """
    az = np.deg2rad(azimuth_deg)
    el = np.deg2rad(elevation_deg)
    return np.array([np.cos(el) * np.sin(az), np.sin(el), np.cos(el) * np.cos(az)])
