"""Domain types for surfel scenes plus the pure-geometry operations.

A :class:`BasicSceneModel` stores primitives structure-of-arrays (float64 in
memory; the scene file narrows to float32). Scale factors are kept as logs and
opacity as a logit so unconstrained gradient steps preserve the invariants;
the exposed ``s_u``/``s_v``/``opacity`` properties return constrained values.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidConfigurationError, InvalidParameterError
from .geometry import light_direction_from_angles, quat_normalize, quat_to_rotation

MIN_SCALE = 1e-6  # world units; degenerate scales clamp up here
DEFAULT_TEXEL_BUDGET = 10_000_000
SH_DC = 0.28209479177387814


def sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


def logit(p: np.ndarray | float) -> np.ndarray:
    p = np.clip(np.asarray(p, dtype=np.float64), 1e-9, 1.0 - 1e-9)
    return np.log(p / (1.0 - p))


@dataclass
class LightConfig:
    """Directional light: unit direction plus per-term intensity scales."""

    direction: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))
    specular_color: np.ndarray = field(default_factory=lambda: np.ones(3))
    ambient_scale: float = 1.0
    diffuse_scale: float = 1.0
    specular_scale: float = 1.0

    def __post_init__(self):
        self.direction = np.asarray(self.direction, dtype=np.float64)
        n = np.linalg.norm(self.direction)
        if n < 1e-9:
            raise InvalidParameterError("light direction must be nonzero")
        self.direction = self.direction / n
        self.specular_color = np.asarray(self.specular_color, dtype=np.float64)

    @classmethod
    def from_angles(cls, azimuth_deg: float, elevation_deg: float, **kw) -> "LightConfig":
        return cls(direction=light_direction_from_angles(azimuth_deg, elevation_deg), **kw)


@dataclass
class EditState:
    """Live, non-destructive edit factors applied at render time.

    All factors are multiplicative; the identity state renders exactly like
    the unedited model. ``palette_override`` replaces the trained palette
    (or, for untextured scenes, shifts c_ind by the palette delta).
    """

    opacity_factor: float = 1.0
    ka_factor: float = 1.0
    kd_factor: float = 1.0
    ks_factor: float = 1.0
    shininess_factor: float = 1.0
    palette_override: np.ndarray | None = None
    light_azimuth_deg: float | None = None
    light_elevation_deg: float | None = None

    def copy(self) -> "EditState":
        out = dataclasses.replace(self)
        if self.palette_override is not None:
            out.palette_override = np.array(self.palette_override, dtype=np.float64)
        return out

    def is_identity(self) -> bool:
        return (
            self.opacity_factor == 1.0
            and self.ka_factor == 1.0
            and self.kd_factor == 1.0
            and self.ks_factor == 1.0
            and self.shininess_factor == 1.0
            and self.palette_override is None
            and self.light_azimuth_deg is None
        )

    def light_direction(self) -> np.ndarray | None:
        if self.light_azimuth_deg is None:
            return None
        return light_direction_from_angles(self.light_azimuth_deg, self.light_elevation_deg or 0.0)


@dataclass
class TextureMap:
    """Per-primitive texel grid; ``texels`` has shape (u_dim, v_dim, 3)."""

    u_dim: int
    v_dim: int
    texels: np.ndarray


@dataclass
class SurfelPrimitive:
    """One 2D Gaussian surfel, value form (the scene stores these SoA)."""

    mu: np.ndarray
    rot: np.ndarray  # unit quaternion (w, x, y, z)
    s_u: float
    s_v: float
    opacity: float
    c_ind: np.ndarray = field(default_factory=lambda: np.zeros(3))
    sh: np.ndarray | None = None  # ((deg+1)^2, 3), degree <= 3
    k_a: float = 1.0
    k_d: float = 0.0
    k_s: float = 0.0
    beta: float = 1.0
    texture: TextureMap | None = None


@dataclass
class BasicSceneModel:
    """All primitives of one basic scene plus shared palette and edit state."""

    mu: np.ndarray  # (N, 3)
    quat: np.ndarray  # (N, 4), unit (w, x, y, z)
    log_su: np.ndarray  # (N,)
    log_sv: np.ndarray  # (N,)
    opacity_logit: np.ndarray  # (N,)
    c_ind: np.ndarray  # (N, 3)
    k_a: np.ndarray  # (N,)
    k_d: np.ndarray
    k_s: np.ndarray
    beta: np.ndarray  # (N,), >= 1
    sh: np.ndarray | None = None  # (N, (deg+1)^2, 3)
    palette: np.ndarray = field(default_factory=lambda: np.zeros(3))
    t_size: float = 0.0  # 0 while unallocated
    t_total: int = DEFAULT_TEXEL_BUDGET
    tex_dims: np.ndarray | None = None  # (N, 2) int64, (U, V)
    tex_offset: np.ndarray | None = None  # (N,) int64 texel start index
    texels: np.ndarray | None = None  # (total_texels, 3)
    uses_palette: bool = False  # texture color includes the palette term
    edit_state: EditState = field(default_factory=EditState)

    # -- shape / derived ---------------------------------------------------

    @property
    def num_primitives(self) -> int:
        return int(self.mu.shape[0])

    @property
    def s_u(self) -> np.ndarray:
        return np.exp(self.log_su)

    @property
    def s_v(self) -> np.ndarray:
        return np.exp(self.log_sv)

    @property
    def opacity(self) -> np.ndarray:
        return sigmoid(self.opacity_logit)

    @property
    def has_texture(self) -> bool:
        return self.texels is not None

    def sh_degree(self) -> int:
        if self.sh is None:
            return -1
        return int(round(np.sqrt(self.sh.shape[1]))) - 1

    def frames(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(t_u, t_v, n) arrays, each (N, 3); n = t_u x t_v, unflipped."""
        R = quat_to_rotation(quat_normalize(self.quat))
        return R[:, :, 0], R[:, :, 1], R[:, :, 2]

    def texture_map(self, i: int) -> TextureMap | None:
        if self.texels is None:
            return None
        u, v = int(self.tex_dims[i, 0]), int(self.tex_dims[i, 1])
        off = int(self.tex_offset[i])
        return TextureMap(u, v, self.texels[off : off + u * v].reshape(u, v, 3))

    def primitive(self, i: int) -> SurfelPrimitive:
        return SurfelPrimitive(
            mu=self.mu[i].copy(),
            rot=self.quat[i].copy(),
            s_u=float(np.exp(self.log_su[i])),
            s_v=float(np.exp(self.log_sv[i])),
            opacity=float(sigmoid(self.opacity_logit[i])),
            c_ind=self.c_ind[i].copy(),
            sh=None if self.sh is None else self.sh[i].copy(),
            k_a=float(self.k_a[i]),
            k_d=float(self.k_d[i]),
            k_s=float(self.k_s[i]),
            beta=float(self.beta[i]),
            texture=self.texture_map(i),
        )

    # -- construction ------------------------------------------------------

    @classmethod
    def empty(cls) -> "BasicSceneModel":
        z = lambda *s: np.zeros(s, dtype=np.float64)
        return cls(
            mu=z(0, 3), quat=z(0, 4), log_su=z(0), log_sv=z(0), opacity_logit=z(0),
            c_ind=z(0, 3), k_a=z(0), k_d=z(0), k_s=z(0), beta=z(0),
        )

    @classmethod
    def from_primitives(cls, prims: list[SurfelPrimitive], palette=None, t_total: int = DEFAULT_TEXEL_BUDGET) -> "BasicSceneModel":
        n = len(prims)
        scene = cls.empty()
        scene.t_total = t_total
        if palette is not None:
            scene.palette = np.asarray(palette, dtype=np.float64)
        if n == 0:
            return scene
        scene.mu = np.stack([p.mu for p in prims]).astype(np.float64)
        scene.quat = quat_normalize(np.stack([p.rot for p in prims]))
        scene.log_su = np.log(np.maximum([p.s_u for p in prims], MIN_SCALE))
        scene.log_sv = np.log(np.maximum([p.s_v for p in prims], MIN_SCALE))
        scene.opacity_logit = logit(np.array([p.opacity for p in prims]))
        scene.c_ind = np.stack([p.c_ind for p in prims]).astype(np.float64)
        scene.k_a = np.array([p.k_a for p in prims], dtype=np.float64)
        scene.k_d = np.array([p.k_d for p in prims], dtype=np.float64)
        scene.k_s = np.array([p.k_s for p in prims], dtype=np.float64)
        scene.beta = np.array([p.beta for p in prims], dtype=np.float64)
        if prims[0].sh is not None:
            scene.sh = np.stack([p.sh for p in prims]).astype(np.float64)
        if all(p.texture is not None for p in prims):
            dims = np.array([[p.texture.u_dim, p.texture.v_dim] for p in prims], dtype=np.int64)
            counts = dims[:, 0] * dims[:, 1]
            offs = np.concatenate([[0], np.cumsum(counts)[:-1]])
            scene.tex_dims = dims
            scene.tex_offset = offs
            scene.texels = np.concatenate([p.texture.texels.reshape(-1, 3) for p in prims]).astype(np.float64)
            scene.uses_palette = True
        return scene

    def copy(self) -> "BasicSceneModel":
        out = dataclasses.replace(self)
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, np.ndarray):
                setattr(out, f.name, v.copy())
        out.edit_state = self.edit_state.copy()
        return out

    def select(self, indices: np.ndarray) -> "BasicSceneModel":
        """New scene holding the given primitives (texels re-packed)."""
        indices = np.asarray(indices, dtype=np.int64)
        out = self.copy()
        for name in ("mu", "quat", "c_ind"):
            setattr(out, name, getattr(self, name)[indices].copy())
        for name in ("log_su", "log_sv", "opacity_logit", "k_a", "k_d", "k_s", "beta"):
            setattr(out, name, getattr(self, name)[indices].copy())
        if self.sh is not None:
            out.sh = self.sh[indices].copy()
        if self.texels is not None:
            dims = self.tex_dims[indices]
            counts = dims[:, 0] * dims[:, 1]
            offs = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
            chunks = [
                self.texels[self.tex_offset[i] : self.tex_offset[i] + self.tex_dims[i, 0] * self.tex_dims[i, 1]]
                for i in indices
            ]
            out.tex_dims = dims.copy()
            out.tex_offset = offs
            out.texels = np.concatenate(chunks) if chunks else np.zeros((0, 3))
        return out

    # -- invariants ----------------------------------------------------------

    def project_parameters(self) -> None:
        """Re-impose invariants after an unconstrained optimizer step."""
        self.quat = quat_normalize(self.quat)
        np.clip(self.opacity_logit, -30.0, 30.0, out=self.opacity_logit)
        np.clip(self.log_su, np.log(MIN_SCALE), 30.0, out=self.log_su)
        np.clip(self.log_sv, np.log(MIN_SCALE), 30.0, out=self.log_sv)
        np.maximum(self.k_a, 0.0, out=self.k_a)
        np.maximum(self.k_d, 0.0, out=self.k_d)
        np.maximum(self.k_s, 0.0, out=self.k_s)
        np.maximum(self.beta, 1.0, out=self.beta)

    def parameter_counts(self) -> dict[str, int]:
        """Scalar parameter counts by attribute family (paper accounting)."""
        n = self.num_primitives
        counts = {
            "geometry": 3 * n + 4 * n + n + n + n,  # mu, quat, s_u, s_v, o
            "shading": 4 * n,  # k_a, k_d, k_s, beta
            "c_ind": 3 * n if self.c_ind is not None else 0,
            "sh": 0 if self.sh is None else int(np.prod(self.sh.shape)),
            "texels": 0 if self.texels is None else int(np.prod(self.texels.shape)),
            "palette": 3,
        }
        return counts


@dataclass
class SceneEntry:
    scene_id: str
    scene: BasicSceneModel
    visible: bool = True


@dataclass
class ComposedScene:
    """References to basic scenes; rendering equals the concatenated list."""

    entries: list[SceneEntry] = field(default_factory=list)

    def visible_scenes(self) -> list[BasicSceneModel]:
        return [e.scene for e in self.entries if e.visible]

    def find(self, scene_id: str) -> SceneEntry:
        for e in self.entries:
            if e.scene_id == scene_id:
                return e
        raise InvalidParameterError(f"unknown scene id: {scene_id!r}")

    @property
    def num_primitives(self) -> int:
        return sum(s.num_primitives for s in self.visible_scenes())


def compose(scenes: list[BasicSceneModel] | list[tuple[str, BasicSceneModel]]) -> ComposedScene:
    """Combine basic scenes without copying or re-optimizing primitives."""
    entries = []
    for i, item in enumerate(scenes):
        if isinstance(item, tuple):
            entries.append(SceneEntry(item[0], item[1]))
        else:
            entries.append(SceneEntry(f"scene{i}", item))
    return ComposedScene(entries)


def as_composed(scene: BasicSceneModel | ComposedScene) -> ComposedScene:
    if isinstance(scene, ComposedScene):
        return scene
    return compose([scene])


# -- operations --------------------------------------------------------------


def derive_frame(rot: np.ndarray, view_dir: np.ndarray):
    """Tangential frame and camera-facing normal from a quaternion.

    Returns (t_u, t_v, n) with n = +-(t_u x t_v) flipped so n . view_dir < 0.
    """
    q = quat_normalize(np.asarray(rot, dtype=np.float64))
    R = quat_to_rotation(q)
    t_u, t_v, n = R[:, 0], R[:, 1], R[:, 2]
    if float(np.dot(n, view_dir)) > 0.0:
        n = -n
    return t_u, t_v, n


def texel_dims_for_scales(s_u: np.ndarray, s_v: np.ndarray, t_size: float) -> np.ndarray:
    u = np.maximum(1, np.ceil(6.0 * s_u / t_size)).astype(np.int64)
    v = np.maximum(1, np.ceil(6.0 * s_v / t_size)).astype(np.int64)
    return np.stack([u, v], axis=1)


def allocate_texels(scene: BasicSceneModel, t_total: int | None = None) -> BasicSceneModel:
    """Choose t_size for the scene budget and allocate per-primitive texel grids.

    The texel edge solves sum((6 s_u / T)(6 s_v / T)) = t_total, so the ceil'd
    counts land in [t_total, 1.25 t_total]. Texels are zero-initialized.
    """
    if t_total is not None:
        scene.t_total = int(t_total)
    budget = int(scene.t_total)
    n = scene.num_primitives
    if budget <= 0:
        raise InvalidConfigurationError("texel budget must be positive")
    if budget < n:
        raise InvalidConfigurationError(f"texel budget {budget} below primitive count {n}")
    s_u = np.maximum(scene.s_u, MIN_SCALE)
    s_v = np.maximum(scene.s_v, MIN_SCALE)
    if not (np.all(np.isfinite(s_u)) and np.all(np.isfinite(s_v))):
        raise InvalidParameterError("non-finite scales at allocation")
    scene.t_size = float(np.sqrt(np.sum(36.0 * s_u * s_v) / budget))
    dims = texel_dims_for_scales(s_u, s_v, scene.t_size)
    counts = dims[:, 0] * dims[:, 1]
    scene.tex_dims = dims
    scene.tex_offset = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    scene.texels = np.zeros((int(counts.sum()), 3), dtype=np.float64)
    scene.uses_palette = True
    return scene


def sample_texture(prim: SurfelPrimitive, p_local: np.ndarray, t_size: float) -> np.ndarray:
    """Bilinearly sample a primitive's texture at a point relative to mu.

    UV follows u = (t_u . p)/T_size + (U-1)/2; coordinates clamp to the border.
    """
    if prim.texture is None:
        raise InvalidParameterError("primitive has no texture map")
    t_u, t_v, _ = derive_frame(prim.rot, np.array([0.0, 0.0, -1.0]))
    tex = prim.texture
    u = float(np.dot(t_u, p_local)) / t_size + (tex.u_dim - 1) / 2.0
    v = float(np.dot(t_v, p_local)) / t_size + (tex.v_dim - 1) / 2.0
    return bilinear_sample(tex.texels, u, v)


def bilinear_sample(grid: np.ndarray, u: float, v: float) -> np.ndarray:
    """Clamped bilinear interpolation on a (U, V, C) grid."""
    U, V = grid.shape[0], grid.shape[1]
    u = min(max(u, 0.0), U - 1.0)
    v = min(max(v, 0.0), V - 1.0)
    u0 = int(np.floor(u))
    v0 = int(np.floor(v))
    u1 = min(u0 + 1, U - 1)
    v1 = min(v0 + 1, V - 1)
    fu = u - u0
    fv = v - v0
    return (
        grid[u0, v0] * (1 - fu) * (1 - fv)
        + grid[u1, v0] * fu * (1 - fv)
        + grid[u0, v1] * (1 - fu) * fv
        + grid[u1, v1] * fu * fv
    )
