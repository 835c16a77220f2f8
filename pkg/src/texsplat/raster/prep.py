"""Per-view preprocessing: flatten scenes, depth-sort, bin primitives to tiles.

Flattening splits into a camera-independent part (:class:`SceneFlat`, the
"uploaded" scene an interactive renderer reuses across frames) and the
per-view part (:class:`FlatView`: visibility, depth order, projections,
tile bins, splat homographies). The forward, backward and vote kernels all
walk primitives in the identical global depth order (camera-space depth of
mu, ties by index).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..cameras import CameraView
from ..errors import InvalidParameterError
from ..scene import BasicSceneModel, ComposedScene, LightConfig, MIN_SCALE
from ..shading import sh_basis
from .constants import ALPHA_CULL, LOWPASS_SIGMA_PX, TILE
from .effective import resolve_composed
from .targets import MODE_IDS, RenderMode


@dataclass
class SceneFlat:
    """Camera-independent flattened scene (reusable across frames)."""

    mu: np.ndarray
    tu: np.ndarray
    tv: np.ndarray
    nrm: np.ndarray
    su: np.ndarray
    sv: np.ndarray
    o_eff: np.ndarray
    base3: np.ndarray
    textured: np.ndarray  # uint8
    tex_u: np.ndarray
    tex_v: np.ndarray
    tex_off: np.ndarray
    tsize: np.ndarray
    texels: np.ndarray  # (T, 3) float64 (backward)
    texels32: np.ndarray  # float32 (forward gathers)
    k_a: np.ndarray
    k_d: np.ndarray
    k_s: np.ndarray
    beta: np.ndarray
    ldir: np.ndarray
    lspec: np.ndarray
    lamb: np.ndarray
    ldiff: np.ndarray
    cut_half: np.ndarray
    light_dirs: np.ndarray  # (S, 3) per-scene effective light directions
    prim_scene: np.ndarray
    scene_prim_start: np.ndarray
    scene_tex_start: np.ndarray
    scenes: list
    effectives: list
    opacity_clamped: np.ndarray

    @property
    def count(self) -> int:
        return int(self.mu.shape[0])


@dataclass
class FlatView:
    """Kernel-ready arrays for one (scene, camera) pair."""

    scene: SceneFlat
    height: int
    width: int
    fx: float
    fy: float
    cx: float
    cy: float
    cam_pos: np.ndarray
    cam_rot: np.ndarray
    near: float
    far: float
    order: np.ndarray
    proj_px: np.ndarray
    proj_py: np.ndarray
    # inverse splat->screen homography rows: M^-1 (px, py, 1) = (u, v, 1)/z_cam
    hA: np.ndarray
    hB: np.ndarray
    hC: np.ndarray
    ncam: np.ndarray  # (M, 3) splat normal in camera coordinates
    pix_dcx: np.ndarray  # (W,)
    pix_dcy: np.ndarray  # (H,)
    pix_inv_dn: np.ndarray  # (H, W)
    prim_light: np.ndarray
    hhat: np.ndarray  # (S, H, W, 3) unit halfway vectors per scene light
    hvalid: np.ndarray  # (S, H, W) uint8
    bin_offsets: np.ndarray
    bin_items: np.ndarray
    item_bbox: np.ndarray  # (L, 4) per-item pixel bbox (x0, x1, y0, y1)
    tiles_x: int
    tiles_y: int
    sh_rgb: np.ndarray  # (M, 3) per-view SH color
    mode: RenderMode = RenderMode.SHADED
    sh_basis_vals: np.ndarray | None = None
    sh_mask: np.ndarray | None = None
    sh_dirs: np.ndarray | None = None
    sh_dist: np.ndarray | None = None

    # convenience pass-throughs so kernels read one object
    def __getattr__(self, name):
        return getattr(self.__dict__["scene"], name)

    @property
    def mode_id(self) -> int:
        return MODE_IDS[self.mode]

    def ray_grids(self) -> tuple[np.ndarray, np.ndarray]:
        """(unit world ray dirs (H, W, 3), |ray at unit camera z| (H, W))."""
        d_cam = np.empty((self.height, self.width, 3))
        d_cam[..., 0] = self.pix_dcx[None, :]
        d_cam[..., 1] = self.pix_dcy[:, None]
        d_cam[..., 2] = 1.0
        dn = 1.0 / self.pix_inv_dn
        w = (d_cam @ self.cam_rot.T) * self.pix_inv_dn[..., None]
        return np.ascontiguousarray(w), np.ascontiguousarray(dn)


def flatten_scene(
    scene: BasicSceneModel | ComposedScene,
    light: LightConfig | None = None,
) -> SceneFlat:
    """Concatenate visible scenes into kernel-ready per-primitive arrays."""
    light = light or LightConfig()
    scenes, effs = resolve_composed(scene, light)
    parts_len = [s.num_primitives for s in scenes]
    M = int(np.sum(parts_len)) if parts_len else 0
    starts = np.concatenate([[0], np.cumsum(parts_len)]).astype(np.int64) if parts_len else np.zeros(1, np.int64)

    def cat(arrs, shape_tail):
        if not arrs:
            return np.zeros((0, *shape_tail))
        return np.concatenate(
            [np.ascontiguousarray(a, dtype=np.float64).reshape(-1, *shape_tail) for a in arrs]
        )

    mu = cat([s.mu for s in scenes], (3,))
    tus, tvs, nrs = [], [], []
    for s in scenes:
        tu_, tv_, n_ = s.frames()
        tus.append(tu_)
        tvs.append(tv_)
        nrs.append(n_)
    tu = cat(tus, (3,))
    tv = cat(tvs, (3,))
    nrm = cat(nrs, (3,))
    su = cat([np.maximum(s.s_u, MIN_SCALE) for s in scenes], ()).ravel()
    sv = cat([np.maximum(s.s_v, MIN_SCALE) for s in scenes], ()).ravel()
    o_eff = cat([e.o_eff for e in effs], ()).ravel()
    base3 = cat([e.base3 for e in effs], (3,))
    k_a = cat([e.k_a for e in effs], ()).ravel()
    k_d = cat([e.k_d for e in effs], ()).ravel()
    k_s = cat([e.k_s for e in effs], ()).ravel()
    beta = cat([e.beta for e in effs], ()).ravel()
    opacity_clamped = (
        np.concatenate([e.opacity_clamped for e in effs]) if effs else np.zeros(0, bool)
    )
    ldir = cat([np.broadcast_to(e.light_dir, (n, 3)) for e, n in zip(effs, parts_len)], (3,))
    lspec = cat([np.broadcast_to(e.light_spec, (n, 3)) for e, n in zip(effs, parts_len)], (3,))
    lamb = cat([np.full(n, e.light_amb) for e, n in zip(effs, parts_len)], ()).ravel()
    ldiff = cat([np.full(n, e.light_diff) for e, n in zip(effs, parts_len)], ()).ravel()
    light_dirs = (
        np.stack([e.light_dir for e in effs]) if effs else np.zeros((1, 3))
    )

    textured = np.zeros(M, dtype=np.uint8)
    tex_u = np.zeros(M, dtype=np.int64)
    tex_v = np.zeros(M, dtype=np.int64)
    tex_off = np.zeros(M, dtype=np.int64)
    tsize = np.ones(M, dtype=np.float64)
    texel_parts = []
    tex_start = [0]
    tex_total = 0
    for si, s in enumerate(scenes):
        a, b = starts[si], starts[si + 1]
        if s.has_texture:
            textured[a:b] = 1
            tex_u[a:b] = s.tex_dims[:, 0]
            tex_v[a:b] = s.tex_dims[:, 1]
            tex_off[a:b] = s.tex_offset + tex_total
            tsize[a:b] = s.t_size
            texel_parts.append(np.ascontiguousarray(s.texels, dtype=np.float64))
            tex_total += s.texels.shape[0]
        tex_start.append(tex_total)
    texels = np.concatenate(texel_parts) if texel_parts else np.zeros((0, 3))

    prim_scene = (
        np.concatenate([np.full(n, si, dtype=np.int64) for si, n in enumerate(parts_len)])
        if parts_len
        else np.zeros(0, np.int64)
    )
    return SceneFlat(
        mu=mu, tu=tu, tv=tv, nrm=nrm, su=su, sv=sv, o_eff=o_eff, base3=base3,
        textured=textured, tex_u=tex_u, tex_v=tex_v, tex_off=tex_off, tsize=tsize,
        texels=texels, texels32=texels.astype(np.float32),
        k_a=k_a, k_d=k_d, k_s=k_s, beta=beta,
        ldir=ldir, lspec=lspec, lamb=lamb, ldiff=ldiff,
        cut_half=np.log(np.maximum(o_eff, 1e-12) * 255.0),
        light_dirs=light_dirs,
        prim_scene=prim_scene, scene_prim_start=starts,
        scene_tex_start=np.asarray(tex_start, dtype=np.int64),
        scenes=scenes, effectives=effs, opacity_clamped=opacity_clamped,
    )


def _compute_sh_rgb(scene: BasicSceneModel, cam_pos: np.ndarray, need_backward: bool):
    n = scene.num_primitives
    d = scene.mu - cam_pos
    dist = np.linalg.norm(d, axis=1)
    dist = np.maximum(dist, 1e-12)
    dirs = d / dist[:, None]
    if scene.sh is None:
        rgb = np.full((n, 3), 0.5)
        basis = np.full((n, 1), 0.0)
        raw = rgb
    else:
        deg = scene.sh_degree()
        basis = sh_basis(dirs, deg)
        raw = np.einsum("nk,nkc->nc", basis, scene.sh) + 0.5
        rgb = np.maximum(raw, 0.0)
    mask = (raw > 0.0).astype(np.float64)
    if need_backward:
        return rgb, basis, mask, dirs, dist
    return rgb, None, None, None, None


@njit(cache=True, nogil=True)
def _hhat_kernel(light_dirs, cam_rot, pix_dcx, pix_dcy, pix_inv_dn, hhat, hvalid):
    S = light_dirs.shape[0]
    H = pix_dcy.shape[0]
    W = pix_dcx.shape[0]
    r00, r01, r02 = cam_rot[0, 0], cam_rot[0, 1], cam_rot[0, 2]
    r10, r11, r12 = cam_rot[1, 0], cam_rot[1, 1], cam_rot[1, 2]
    r20, r21, r22 = cam_rot[2, 0], cam_rot[2, 1], cam_rot[2, 2]
    for py in range(H):
        dcy = pix_dcy[py]
        for px in range(W):
            dcx = pix_dcx[px]
            ivdn = pix_inv_dn[py, px]
            wx = (r00 * dcx + r01 * dcy + r02) * ivdn
            wy = (r10 * dcx + r11 * dcy + r12) * ivdn
            wz = (r20 * dcx + r21 * dcy + r22) * ivdn
            for si in range(S):
                hx = light_dirs[si, 0] - wx
                hy = light_dirs[si, 1] - wy
                hz = light_dirs[si, 2] - wz
                hn = np.sqrt(hx * hx + hy * hy + hz * hz)
                if hn > 1e-9:
                    hhat[si, py, px, 0] = hx / hn
                    hhat[si, py, px, 1] = hy / hn
                    hhat[si, py, px, 2] = hz / hn
                    hvalid[si, py, px] = 1
                else:
                    hhat[si, py, px, 0] = 0.0
                    hhat[si, py, px, 1] = 0.0
                    hhat[si, py, px, 2] = 0.0
                    hvalid[si, py, px] = 0


def flatten_view(
    scene: BasicSceneModel | ComposedScene,
    camera: CameraView,
    mode: RenderMode = RenderMode.SHADED,
    light: LightConfig | None = None,
    need_sh_backward: bool = False,
    scene_flat: SceneFlat | None = None,
) -> FlatView:
    if camera.width <= 0 or camera.height <= 0:
        raise InvalidParameterError("zero-dimension image")
    sf = scene_flat if scene_flat is not None else flatten_scene(scene, light)
    M = sf.count

    # visibility, ordering, projection
    pc = (sf.mu - camera.position) @ camera.rotation if M else np.zeros((0, 3))
    z_mu = pc[:, 2] if M else np.zeros(0)
    visible = (z_mu > camera.near) & (z_mu < camera.far) & (sf.o_eff > ALPHA_CULL)
    vis_idx = np.nonzero(visible)[0]
    order = vis_idx[np.argsort(z_mu[vis_idx], kind="stable")].astype(np.int64)

    proj_px = np.zeros(M)
    proj_py = np.zeros(M)
    if M:
        with np.errstate(divide="ignore", invalid="ignore"):
            proj_px = np.where(z_mu > 0, camera.fx * pc[:, 0] / z_mu + camera.cx, 0.0)
            proj_py = np.where(z_mu > 0, camera.fy * pc[:, 1] / z_mu + camera.cy, 0.0)

    bin_offsets, bin_items, item_bbox, tiles_x, tiles_y = _bin_tiles(
        camera, order, (sf.mu, sf.tu, sf.tv, sf.su, sf.sv), proj_px, proj_py, sf.o_eff
    )
    hA, hB, hC, ncam = _splat_homographies(camera, sf.mu, sf.tu, sf.tv, sf.nrm, sf.su, sf.sv)

    pix_dcx = (np.arange(camera.width, dtype=np.float64) - camera.cx) / camera.fx
    pix_dcy = (np.arange(camera.height, dtype=np.float64) - camera.cy) / camera.fy
    pix_inv_dn = 1.0 / np.sqrt(pix_dcx[None, :] ** 2 + pix_dcy[:, None] ** 2 + 1.0)

    cam_rot = np.ascontiguousarray(camera.rotation, dtype=np.float64)
    if mode is RenderMode.SHADED and M:
        n_lights = sf.light_dirs.shape[0]
        hhat = np.empty((n_lights, camera.height, camera.width, 3))
        hvalid = np.empty((n_lights, camera.height, camera.width), dtype=np.uint8)
        _hhat_kernel(sf.light_dirs, cam_rot, pix_dcx, pix_dcy, pix_inv_dn, hhat, hvalid)
    else:
        hhat = np.zeros((1, 1, 1, 3))
        hvalid = np.zeros((1, 1, 1), dtype=np.uint8)

    sh_rgb = np.zeros((M, 3))
    sh_basis_vals = sh_mask = sh_dirs = sh_dist = None
    if mode is RenderMode.SH:
        starts = sf.scene_prim_start
        rgb_parts, b_parts, m_parts, d_parts, dist_parts = [], [], [], [], []
        for s in sf.scenes:
            rgb, b, m, d, dist = _compute_sh_rgb(s, camera.position, need_sh_backward)
            rgb_parts.append(rgb)
            if need_sh_backward:
                b_parts.append(b)
                m_parts.append(m)
                d_parts.append(d)
                dist_parts.append(dist)
        if rgb_parts:
            sh_rgb = np.ascontiguousarray(np.concatenate(rgb_parts))
        if need_sh_backward and sf.scenes:
            kmax = max(b.shape[1] for b in b_parts)
            sh_basis_vals = np.zeros((M, kmax))
            for si, b in enumerate(b_parts):
                sh_basis_vals[starts[si] : starts[si + 1], : b.shape[1]] = b
            sh_mask = np.concatenate(m_parts)
            sh_dirs = np.ascontiguousarray(np.concatenate(d_parts))
            sh_dist = np.concatenate(dist_parts)

    return FlatView(
        scene=sf,
        height=camera.height, width=camera.width,
        fx=camera.fx, fy=camera.fy, cx=camera.cx, cy=camera.cy,
        cam_pos=np.ascontiguousarray(camera.position, dtype=np.float64),
        cam_rot=cam_rot,
        near=camera.near, far=camera.far,
        order=order, proj_px=proj_px, proj_py=proj_py,
        hA=hA, hB=hB, hC=hC, ncam=ncam,
        pix_dcx=pix_dcx, pix_dcy=pix_dcy, pix_inv_dn=pix_inv_dn,
        prim_light=sf.prim_scene, hhat=hhat, hvalid=hvalid,
        bin_offsets=bin_offsets, bin_items=bin_items, item_bbox=item_bbox,
        tiles_x=tiles_x, tiles_y=tiles_y,
        sh_rgb=sh_rgb, mode=mode,
        sh_basis_vals=sh_basis_vals, sh_mask=sh_mask, sh_dirs=sh_dirs, sh_dist=sh_dist,
    )


def _splat_homographies(camera, mu, tu, tv, nrm, su, sv):
    """Inverse of the splat->screen homography M = K [R'|t'] [s_u t_u, s_v t_v, m].

    M maps (u, v, 1) to z_cam * (px, py, 1), so M^-1 (px, py, 1) yields
    (u/z, v/z, 1/z). Splats whose plane passes through the camera make M
    singular; their C row is zeroed, which the kernel culls via 1/z bounds.
    """
    M_count = mu.shape[0]
    if M_count == 0:
        z = np.zeros((0, 3))
        return z, z.copy(), z.copy(), z.copy()
    Rt = camera.rotation.T
    K = np.array(
        [[camera.fx, 0.0, camera.cx], [0.0, camera.fy, camera.cy], [0.0, 0.0, 1.0]]
    )
    m = mu - camera.position
    cols = np.stack(
        [su[:, None] * (tu @ Rt.T), sv[:, None] * (tv @ Rt.T), m @ Rt.T], axis=2
    )  # (M, 3, 3) camera-space columns
    a = K[None] @ cols
    det = (
        a[:, 0, 0] * (a[:, 1, 1] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 1])
        - a[:, 0, 1] * (a[:, 1, 0] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 0])
        + a[:, 0, 2] * (a[:, 1, 0] * a[:, 2, 1] - a[:, 1, 1] * a[:, 2, 0])
    )
    ok = np.abs(det) > 1e-30
    inv_det = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    adj = np.empty_like(a)
    adj[:, 0, 0] = a[:, 1, 1] * a[:, 2, 2] - a[:, 1, 2] * a[:, 2, 1]
    adj[:, 0, 1] = a[:, 0, 2] * a[:, 2, 1] - a[:, 0, 1] * a[:, 2, 2]
    adj[:, 0, 2] = a[:, 0, 1] * a[:, 1, 2] - a[:, 0, 2] * a[:, 1, 1]
    adj[:, 1, 0] = a[:, 1, 2] * a[:, 2, 0] - a[:, 1, 0] * a[:, 2, 2]
    adj[:, 1, 1] = a[:, 0, 0] * a[:, 2, 2] - a[:, 0, 2] * a[:, 2, 0]
    adj[:, 1, 2] = a[:, 0, 2] * a[:, 1, 0] - a[:, 0, 0] * a[:, 1, 2]
    adj[:, 2, 0] = a[:, 1, 0] * a[:, 2, 1] - a[:, 1, 1] * a[:, 2, 0]
    adj[:, 2, 1] = a[:, 0, 1] * a[:, 2, 0] - a[:, 0, 0] * a[:, 2, 1]
    adj[:, 2, 2] = a[:, 0, 0] * a[:, 1, 1] - a[:, 0, 1] * a[:, 1, 0]
    Minv = adj * inv_det[:, None, None]
    ncam = nrm @ Rt.T
    return (
        np.ascontiguousarray(Minv[:, 0, :]),
        np.ascontiguousarray(Minv[:, 1, :]),
        np.ascontiguousarray(Minv[:, 2, :]),
        np.ascontiguousarray(ncam),
    )


def _projected_extents(camera, order, mu, tu, tv, su, sv, rho_cut):
    """Exact screen bbox of each splat's o*G >= 1/255 ellipse.

    The extreme screen coordinate over the disk u^2+v^2 <= r^2 solves a
    tangent-line quadratic: with a/b/c the rows of the splat->screen
    homography in (u, v, 1) coordinates, x extremes are the roots of
    x^2 (c3^2 - r^2 |c12|^2) - 2x (a3 c3 - r^2 a12.c12) + (a3^2 - r^2 |a12|^2).
    Valid only while the whole disk is in front of the camera (positive
    denominator); otherwise the caller falls back to the full image.
    """
    Rt = camera.rotation.T  # world -> camera rotation
    m = mu[order] - camera.position
    r = np.sqrt(rho_cut)

    def rows(axis: int) -> np.ndarray:
        return np.stack(
            [
                su[order] * (tu[order] @ Rt[axis]),
                sv[order] * (tv[order] @ Rt[axis]),
                m @ Rt[axis],
            ],
            axis=1,
        )

    a = rows(0)
    b = rows(1)
    c = rows(2)
    r2 = (r * r)[:, None]

    def extremes(num_row):
        denom = c[:, 2] ** 2 - r2[:, 0] * (c[:, 0] ** 2 + c[:, 1] ** 2)
        ok = denom > 1e-12
        safe = np.where(ok, denom, 1.0)
        mid = (num_row[:, 2] * c[:, 2] - r2[:, 0] * (num_row[:, 0] * c[:, 0] + num_row[:, 1] * c[:, 1])) / safe
        const = (num_row[:, 2] ** 2 - r2[:, 0] * (num_row[:, 0] ** 2 + num_row[:, 1] ** 2)) / safe
        disc = np.sqrt(np.maximum(mid * mid - const, 0.0))
        return ok, mid - disc, mid + disc

    okx, xlo, xhi = extremes(a)
    oky, ylo, yhi = extremes(b)
    ok = okx & oky
    xlo = camera.fx * xlo + camera.cx
    xhi = camera.fx * xhi + camera.cx
    ylo = camera.fy * ylo + camera.cy
    yhi = camera.fy * yhi + camera.cy
    return ok, xlo, xhi, ylo, yhi


def _bin_tiles(camera, order, flat_arrays, proj_px, proj_py, o_eff):
    """Conservative tile lists: no contribution above the 1/255 cull is lost."""
    mu, tu, tv, su, sv = flat_arrays
    tiles_x = (camera.width + TILE - 1) // TILE
    tiles_y = (camera.height + TILE - 1) // TILE
    n_tiles = tiles_x * tiles_y
    K = order.shape[0]
    empty_bbox = np.zeros((0, 4), np.int64)
    if K == 0:
        return np.zeros(n_tiles + 1, np.int64), np.zeros(0, np.int64), empty_bbox, tiles_x, tiles_y

    # splat-space cutoff where o*G falls below 1/255
    rho_cut = 2.0 * np.log(np.maximum(o_eff[order], ALPHA_CULL + 1e-12) * 255.0)
    rho_cut = np.maximum(rho_cut, 1e-12)
    ok, xlo, xhi, ylo, yhi = _projected_extents(camera, order, mu, tu, tv, su, sv, rho_cut)
    big = max(camera.width, camera.height) * 2.0
    xlo = np.where(ok, xlo, -big)
    xhi = np.where(ok, xhi, big)
    ylo = np.where(ok, ylo, -big)
    yhi = np.where(ok, yhi, big)
    # screen-space low-pass floor can extend past the splat footprint
    r_lp = LOWPASS_SIGMA_PX * np.sqrt(rho_cut)
    px = proj_px[order]
    py = proj_py[order]
    xlo = np.minimum(xlo, px - r_lp) - 1.0
    xhi = np.maximum(xhi, px + r_lp) + 1.0
    ylo = np.minimum(ylo, py - r_lp) - 1.0
    yhi = np.maximum(yhi, py + r_lp) + 1.0

    on = (xhi >= 0) & (xlo <= camera.width - 1) & (yhi >= 0) & (ylo <= camera.height - 1)
    # integer pixel bbox, clipped to the image
    ix0 = np.clip(np.ceil(xlo), 0, camera.width - 1).astype(np.int64)
    ix1 = np.clip(np.floor(xhi), 0, camera.width - 1).astype(np.int64)
    iy0 = np.clip(np.ceil(ylo), 0, camera.height - 1).astype(np.int64)
    iy1 = np.clip(np.floor(yhi), 0, camera.height - 1).astype(np.int64)
    on &= (ix1 >= ix0) & (iy1 >= iy0)

    x0 = ix0 // TILE
    x1 = ix1 // TILE
    y0 = iy0 // TILE
    y1 = iy1 // TILE
    w = x1 - x0 + 1
    counts = np.where(on, w * (y1 - y0 + 1), 0)
    total = int(counts.sum())
    items = np.repeat(np.arange(K, dtype=np.int64), counts)
    # local rank of each (tile, item) pair inside its item's bbox
    block_start = np.repeat(np.cumsum(counts) - counts, counts)
    local = np.arange(total, dtype=np.int64) - block_start
    wrep = w[items]
    ty = y0[items] + local // wrep
    tx = x0[items] + local % wrep
    tile_ids = ty * tiles_x + tx
    sort = np.argsort(tile_ids, kind="stable")  # keeps depth order within a tile
    tile_ids = tile_ids[sort]
    items = items[sort]
    offsets = np.zeros(n_tiles + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(np.bincount(tile_ids, minlength=n_tiles))
    item_bbox = np.stack([ix0[items], ix1[items], iy0[items], iy1[items]], axis=1)
    return offsets, items, item_bbox, tiles_x, tiles_y
