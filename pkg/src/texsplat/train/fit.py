"""Three-phase fitting: vanilla surfels -> shading attributes -> textures."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.spatial import cKDTree

from ..errors import EmptyDatasetError, TrainingDivergedError
from ..io.dataset import MultiViewDataset
from ..scene import BasicSceneModel, allocate_texels, logit
from ..geometry import quat_normalize
from ..shading import SH_C0
from ..raster.targets import RenderMode
from .adam import AdamOptimizer
from .autograd import FreezeSpec, LossWeights, backward, render_with_loss
from .config import TrainConfig
from .density import density_control

LogFn = Callable[[dict], None]


def scene_bounds(dataset: MultiViewDataset) -> tuple[np.ndarray, float]:
    """Least-squares intersection of optical axes and a frustum-fit extent."""
    A = np.zeros((3, 3))
    b = np.zeros(3)
    for cam in dataset.cameras:
        d = cam.rotation[:, 2]
        P = np.eye(3) - np.outer(d, d)
        A += P
        b += P @ cam.position
    center = np.linalg.solve(A + 1e-9 * np.eye(3), b)
    extent = np.inf
    for cam in dataset.cameras:
        dist = float(np.linalg.norm(cam.position - center))
        half_fov = min(np.arctan(cam.width / (2 * cam.fx)), np.arctan(cam.height / (2 * cam.fy)))
        extent = min(extent, dist * np.tan(half_fov))
    return center, float(extent * 0.9)


def random_init(dataset: MultiViewDataset, config: TrainConfig, rng: np.random.Generator) -> BasicSceneModel:
    center, extent = scene_bounds(dataset)
    n = config.init_primitives
    scene = BasicSceneModel.empty()
    scene.t_total = config.t_total
    scene.mu = center + rng.uniform(-extent, extent, size=(n, 3))
    scene.quat = quat_normalize(rng.normal(size=(n, 4)))
    tree = cKDTree(scene.mu)
    dist, _ = tree.query(scene.mu, k=2)
    s0 = np.maximum(dist[:, 1].mean(), 1e-4)
    scene.log_su = np.full(n, np.log(s0))
    scene.log_sv = np.full(n, np.log(s0))
    scene.opacity_logit = np.full(n, float(logit(config.init_opacity)))
    scene.sh = np.zeros((n, 16, 3))
    scene.sh[:, 0, :] = rng.normal(scale=0.05, size=(n, 3))
    scene.c_ind = np.zeros((n, 3))
    scene.k_a = np.full(n, 0.7)
    scene.k_d = np.full(n, 0.3)
    scene.k_s = np.full(n, 0.05)
    scene.beta = np.full(n, 4.0)
    return scene


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    mse = float(np.mean((a - b) ** 2))
    if mse <= 0.0:
        return float("inf")
    return -10.0 * np.log10(mse)


def evaluate(scene, dataset, indices, mode, light=None) -> float:
    from ..raster.tiled import render

    vals = []
    for i in indices:
        t = render(scene, dataset.cameras[i], mode=mode, light=light, background=dataset.background)
        vals.append(psnr(t.color, dataset.images[i][..., :3]))
    return float(np.mean(vals)) if vals else float("nan")


def _ndc_grad_scale(scene, camera) -> np.ndarray:
    z = np.maximum(camera.cam_depth(scene.mu), camera.near)
    return camera.fx / (z * 0.5 * camera.width)


def fit(
    dataset: MultiViewDataset,
    config: TrainConfig | None = None,
    log_fn: LogFn | None = None,
    eval_test: bool = True,
) -> BasicSceneModel:
    """Fit one basic scene to a multi-view dataset (three optimization phases).

    Phase 1 optimizes geometry/opacity/SH under the reconstruction loss with
    density control; phase 2 switches the view-dependent color to Blinn-Phong
    shading (c_ind seeded from the SH DC term) and adds the bilateral
    smoothness terms; phase 3 freezes geometry and shading, allocates texels,
    and optimizes recolorable textures + palette under L_c with L1 sparsity.
    """
    if len(dataset) < 2:
        raise EmptyDatasetError("need at least 2 views to fit")
    config = (config or TrainConfig()).validate()
    rng = np.random.default_rng(config.seed)
    train_idx = dataset.split("train")
    test_idx = dataset.split("test") if eval_test else []

    scene = random_init(dataset, config, rng)
    center, extent = scene_bounds(dataset)
    total_geom_iters = config.phase1_iters + config.phase2_iters
    opt = AdamOptimizer(scene, config, extent=extent, total_iters=total_geom_iters)

    grad_accum = np.zeros(scene.num_primitives)
    grad_count = np.zeros(scene.num_primitives)

    def emit(phase: str, iteration: int, report, mode: RenderMode):
        if log_fn is None:
            return
        entry = {
            "phase": phase,
            "iteration": iteration,
            "L_c": report.terms.get("L_c", float("nan")),
            "L_n": report.terms.get("L_n", 0.0),
            "L_alpha": report.terms.get("L_alpha", 0.0),
            "psnr": evaluate(scene, dataset, test_idx or train_idx[:4], mode),
            "primitives": scene.num_primitives,
        }
        log_fn(entry)

    def check_finite(report, phase, iteration):
        if not np.isfinite(report.total):
            raise TrainingDivergedError(
                f"non-finite loss at {phase} iteration {iteration}: {report.terms}"
            )

    # ---- phase 1: vanilla surfels (SH color) -------------------------------
    w1 = LossWeights(
        lambda_ssim=config.lambda_ssim, lambda_n=config.lambda_n, lambda_alpha=config.lambda_alpha
    )
    freeze1 = FreezeSpec.phase1()
    for it in range(config.phase1_iters):
        view = train_idx[int(rng.integers(len(train_idx)))]
        cam = dataset.cameras[view]
        img = dataset.images[view]
        targets, report, grads, flatv = render_with_loss(
            scene, cam, img[..., :3], img[..., 3], RenderMode.SH, w1,
            background=dataset.background,
        )
        check_finite(report, "phase1", it)
        bundle = backward(scene, cam, targets, grads, RenderMode.SH, flat=flatv,
                          background=dataset.background, freeze=freeze1)
        gnorm = np.linalg.norm(bundle.mu, axis=1) * _ndc_grad_scale(scene, cam)
        grad_accum += gnorm
        grad_count += (gnorm > 0).astype(np.float64)
        opt.step(scene, bundle, it)

        if (
            config.densify_start <= it <= config.densify_end
            and it > 0 and it % config.densify_interval == 0
        ):
            avg = grad_accum / np.maximum(grad_count, 1.0)
            scene, kept, n_new = density_control(scene, avg, config, extent, rng, optimizer=opt)
            grad_accum = np.zeros(scene.num_primitives)
            grad_count = np.zeros(scene.num_primitives)
        if it % config.eval_interval == 0:
            emit("2dgs", it, report, RenderMode.SH)

    # ---- phase 2: shading attributes ---------------------------------------
    if scene.sh is not None:
        scene.c_ind = np.maximum(SH_C0 * scene.sh[:, 0, :] + 0.5, 0.0)
    w2 = LossWeights(
        lambda_ssim=config.lambda_ssim, lambda_n=config.lambda_n,
        lambda_alpha=config.lambda_alpha, lambda_bilateral=config.lambda_bilateral,
    )
    freeze2 = FreezeSpec.phase2()
    opt.resize(scene)
    grad_accum = np.zeros(scene.num_primitives)
    grad_count = np.zeros(scene.num_primitives)
    for it2 in range(config.phase2_iters):
        it = config.phase1_iters + it2
        view = train_idx[int(rng.integers(len(train_idx)))]
        cam = dataset.cameras[view]
        img = dataset.images[view]
        targets, report, grads, flatv = render_with_loss(
            scene, cam, img[..., :3], img[..., 3], RenderMode.SHADED, w2,
            background=dataset.background,
        )
        check_finite(report, "shading", it)
        bundle = backward(scene, cam, targets, grads, RenderMode.SHADED, flat=flatv,
                          background=dataset.background, freeze=freeze2)
        gnorm = np.linalg.norm(bundle.mu, axis=1) * _ndc_grad_scale(scene, cam)
        grad_accum += gnorm
        grad_count += (gnorm > 0).astype(np.float64)
        opt.step(scene, bundle, it)
        if (
            config.densify_start <= it <= config.densify_end
            and it2 > 0 and it % config.densify_interval == 0
        ):
            avg = grad_accum / np.maximum(grad_count, 1.0)
            scene, kept, n_new = density_control(scene, avg, config, extent, rng, optimizer=opt)
            grad_accum = np.zeros(scene.num_primitives)
            grad_count = np.zeros(scene.num_primitives)
        if it2 % config.eval_interval == 0:
            emit("shading", it, report, RenderMode.SHADED)

    # ---- phase 3: recolorable textures -------------------------------------
    if config.phase3_iters > 0 or config.t_total > 0:
        allocate_texels(scene, config.t_total)
        scene.palette = dataset.mean_foreground_color()
        # texels start at (c_ind - palette): the first textured render equals
        # the phase-2 output, and sparsity then pulls offsets toward zero
        diff = scene.c_ind - scene.palette
        counts = scene.tex_dims[:, 0] * scene.tex_dims[:, 1]
        scene.texels = np.repeat(diff, counts, axis=0)
        opt.resize(scene)
    w3 = LossWeights(lambda_ssim=config.lambda_ssim, lambda_sparsity=config.lambda_sparsity)
    freeze3 = FreezeSpec.phase3()
    for it3 in range(config.phase3_iters):
        it = total_geom_iters + it3
        view = train_idx[int(rng.integers(len(train_idx)))]
        cam = dataset.cameras[view]
        img = dataset.images[view]
        targets, report, grads, flatv = render_with_loss(
            scene, cam, img[..., :3], img[..., 3], RenderMode.SHADED, w3,
            background=dataset.background,
        )
        check_finite(report, "texture", it)
        bundle = backward(scene, cam, targets, grads, RenderMode.SHADED, flat=flatv,
                          background=dataset.background, freeze=freeze3)
        opt.step(scene, bundle, it)
        if it3 % config.eval_interval == 0:
            emit("texture", it, report, RenderMode.SHADED)
    return scene
