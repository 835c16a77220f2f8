"""Synthetic scenes and datasets for tests, benchmarks and demos."""

from __future__ import annotations

import numpy as np

from .cameras import icosphere_cameras
from .geometry import quat_align_z, quat_normalize
from .io.dataset import MultiViewDataset
from .raster.targets import RenderMode
from .raster.tiled import render
from .scene import BasicSceneModel, LightConfig, allocate_texels, logit


def fibonacci_shell(n: int) -> np.ndarray:
    i = np.arange(n, dtype=np.float64)
    ga = np.pi * (3.0 - np.sqrt(5.0))
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    th = ga * i
    return np.stack([r * np.cos(th), r * np.sin(th), z], axis=1)


def textured_sphere_scene(
    n_prims: int = 500,
    radius: float = 1.0,
    seed: int = 0,
    t_total: int = 50_000,
    size_factor: float = 1.7,
    opacity_range: tuple[float, float] = (0.75, 0.98),
) -> BasicSceneModel:
    """Sphere shell of tangent surfels with painted stripe textures."""
    rng = np.random.default_rng(seed)
    pts = fibonacci_shell(n_prims) * radius
    scene = BasicSceneModel.empty()
    scene.mu = pts
    scene.quat = np.stack([quat_align_z(p / np.linalg.norm(p)) for p in pts])
    # surfel size ~ shell coverage: area 4 pi r^2 spread over n disks
    s = size_factor * radius * np.sqrt(4.0 / n_prims)
    scene.log_su = np.log(np.full(n_prims, s) * rng.uniform(0.8, 1.2, n_prims))
    scene.log_sv = np.log(np.full(n_prims, s) * rng.uniform(0.8, 1.2, n_prims))
    scene.opacity_logit = np.asarray(logit(rng.uniform(*opacity_range, n_prims)))
    scene.c_ind = np.zeros((n_prims, 3))
    scene.k_a = np.full(n_prims, 0.55)
    scene.k_d = np.full(n_prims, 0.5)
    scene.k_s = np.full(n_prims, 0.15)
    scene.beta = np.full(n_prims, 12.0)
    allocate_texels(scene, t_total)
    scene.palette = np.array([0.55, 0.35, 0.25])
    # stripes + polka noise in the texture offsets
    for i in range(n_prims):
        tm = scene.texture_map(i)
        uu = np.arange(tm.u_dim)[:, None] + np.zeros((1, tm.v_dim))
        phase = 2.0 * np.pi * (pts[i, 2] / radius)
        stripe = 0.18 * np.sin(uu * 1.3 + phase)
        tm.texels[..., 0] = stripe
        tm.texels[..., 1] = -0.5 * stripe + 0.06 * np.cos(uu * 0.7)
        tm.texels[..., 2] = 0.1 * np.sin(uu * 0.9 + 1.0 + phase)
    scene.c_ind = scene.palette + np.array(
        [scene.texture_map(i).texels.mean(axis=(0, 1)) for i in range(n_prims)]
    )
    return scene


def two_cluster_scene(per_cluster: int = 60, seed: int = 3) -> tuple[BasicSceneModel, np.ndarray]:
    """Two spatially disjoint splat clusters; returns (scene, cluster labels)."""
    rng = np.random.default_rng(seed)
    centers = np.array([[-1.2, 0.0, 0.0], [1.2, 0.0, 0.0]])
    scene = BasicSceneModel.empty()
    n = per_cluster * 2
    mus, labels = [], []
    for c, center in enumerate(centers):
        mus.append(center + rng.normal(scale=0.25, size=(per_cluster, 3)))
        labels += [c + 1] * per_cluster
    scene.mu = np.concatenate(mus)
    scene.quat = quat_normalize(rng.normal(size=(n, 4)))
    scene.log_su = np.log(rng.uniform(0.08, 0.2, n))
    scene.log_sv = np.log(rng.uniform(0.08, 0.2, n))
    scene.opacity_logit = np.asarray(logit(rng.uniform(0.6, 0.95, n)))
    scene.c_ind = rng.uniform(0.2, 0.9, (n, 3))
    scene.k_a = np.full(n, 1.0)
    scene.k_d = np.zeros(n)
    scene.k_s = np.zeros(n)
    scene.beta = np.ones(n)
    return scene, np.array(labels)


def random_scene(
    n_prims: int,
    seed: int = 0,
    textured: bool = True,
    with_sh: bool = False,
    t_total: int | None = None,
    spread: float = 0.6,
) -> BasicSceneModel:
    """Random surfel soup for oracle and serialization tests."""
    rng = np.random.default_rng(seed)
    scene = BasicSceneModel.empty()
    scene.mu = rng.uniform(-spread, spread, (n_prims, 3))
    scene.quat = quat_normalize(rng.normal(size=(n_prims, 4)))
    scene.log_su = np.log(rng.uniform(0.05, 0.45, n_prims))
    scene.log_sv = np.log(rng.uniform(0.05, 0.45, n_prims))
    scene.opacity_logit = np.asarray(logit(rng.uniform(0.05, 0.98, n_prims)))
    scene.c_ind = rng.uniform(0.0, 1.0, (n_prims, 3))
    scene.k_a = rng.uniform(0.2, 1.0, n_prims)
    scene.k_d = rng.uniform(0.0, 1.0, n_prims)
    scene.k_s = rng.uniform(0.0, 0.6, n_prims)
    scene.beta = rng.uniform(1.0, 24.0, n_prims)
    if with_sh:
        scene.sh = rng.normal(scale=0.25, size=(n_prims, 16, 3))
    if textured:
        allocate_texels(scene, t_total or max(40 * n_prims, n_prims))
        scene.texels[:] = rng.uniform(-0.3, 0.3, scene.texels.shape)
        scene.palette = rng.uniform(0.2, 0.8, 3)
    return scene


def sphere_dataset(
    n_views: int = 24,
    size: int = 64,
    n_prims: int = 500,
    seed: int = 0,
    light: LightConfig | None = None,
    test_fraction: float = 0.17,
    camera_radius: float = 3.2,
) -> tuple[MultiViewDataset, BasicSceneModel]:
    """Render a textured-sphere scene into a multi-view RGBA dataset."""
    scene = textured_sphere_scene(n_prims=n_prims, seed=seed)
    light = light or LightConfig.from_angles(30.0, 35.0)
    cams = icosphere_cameras(n_views, radius=camera_radius, width=size, height=size,
                             fov_y_deg=42.0, near=0.05, far=50.0)
    images = []
    for cam in cams:
        t = render(scene, cam, mode=RenderMode.SHADED, light=light)
        rgba = np.concatenate([np.clip(t.color, 0, 1), np.clip(t.alpha, 0, 1)[..., None]], axis=-1)
        images.append(rgba)
    n_test = max(1, int(round(n_views * test_fraction)))
    test_idx = list(range(0, n_views, max(1, n_views // n_test)))[:n_test]
    train_idx = [i for i in range(n_views) if i not in test_idx]
    return (
        MultiViewDataset(
            images=images, cameras=cams, background=np.zeros(3),
            train_indices=train_idx, test_indices=test_idx,
        ),
        scene,
    )
