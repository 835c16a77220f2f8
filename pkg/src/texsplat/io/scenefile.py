"""Binary scene format ("TGSV"): bit-exact little-endian float32 arrays.

Layout (version 1):
  magic "TGSV" | u32 version | u32 scene_count
  per scene, trained parameters:
    u16 id_len + utf8 id | u32 N
    f32 mu[3N] | f32 quat[4N] | f32 log_scales[2N] | f32 opacity_logit[N]
    u8 has_cind (+ f32 c_ind[3N])
    f32 k_a[N] k_d[N] k_s[N] beta[N]
    i32 sh_degree (-1 = absent) (+ f32 sh[N*(deg+1)^2*3])
    f32 palette[3] | f32 t_size
    u8 has_texture (+ per primitive: u16 U, u16 V, f32 texels[U*V*3])
    u8 uses_palette
  per scene, edit state (kept apart from trained bytes):
    u8 visible | f32 factors[5]
    u8 has_palette_override (+ f32[3]) | u8 has_light (+ f32 az, f32 el)

Final models may drop c_ind and SH (the early-phase-only attributes), which
makes the per-primitive payload exactly 14N floats.
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from ..errors import SceneFormatError
from ..scene import BasicSceneModel, ComposedScene, EditState, SceneEntry, as_composed

MAGIC = b"TGSV"
VERSION = 1


def _write_f32(buf, arr) -> None:
    buf.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise SceneFormatError("truncated scene file")
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def i32(self) -> int:
        return struct.unpack("<i", self.take(4))[0]

    def f32(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(4 * count), dtype="<f4").astype(np.float64)


def _write_scene_trained(buf, scene_id: str, s: BasicSceneModel, drop_aux: bool) -> None:
    sid = scene_id.encode("utf-8")
    buf.write(struct.pack("<H", len(sid)))
    buf.write(sid)
    n = s.num_primitives
    buf.write(struct.pack("<I", n))
    _write_f32(buf, s.mu)
    _write_f32(buf, s.quat)
    _write_f32(buf, s.log_su)
    _write_f32(buf, s.log_sv)
    _write_f32(buf, s.opacity_logit)
    has_cind = not drop_aux
    buf.write(struct.pack("<B", 1 if has_cind else 0))
    if has_cind:
        _write_f32(buf, s.c_ind)
    _write_f32(buf, s.k_a)
    _write_f32(buf, s.k_d)
    _write_f32(buf, s.k_s)
    _write_f32(buf, s.beta)
    degree = -1 if (drop_aux or s.sh is None) else s.sh_degree()
    buf.write(struct.pack("<i", degree))
    if degree >= 0:
        _write_f32(buf, s.sh)
    _write_f32(buf, s.palette)
    _write_f32(buf, np.array([s.t_size]))
    buf.write(struct.pack("<B", 1 if s.has_texture else 0))
    if s.has_texture:
        for i in range(n):
            u, v = int(s.tex_dims[i, 0]), int(s.tex_dims[i, 1])
            if u >= 1 << 16 or v >= 1 << 16:
                raise SceneFormatError(f"texture dims {u}x{v} exceed the 16-bit format limit")
            buf.write(struct.pack("<HH", u, v))
            off = int(s.tex_offset[i])
            _write_f32(buf, s.texels[off : off + u * v])
    buf.write(struct.pack("<B", 1 if s.uses_palette else 0))


def _write_scene_edit(buf, visible: bool, es: EditState) -> None:
    buf.write(struct.pack("<B", 1 if visible else 0))
    _write_f32(buf, np.array([es.opacity_factor, es.ka_factor, es.kd_factor, es.ks_factor, es.shininess_factor]))
    buf.write(struct.pack("<B", 1 if es.palette_override is not None else 0))
    if es.palette_override is not None:
        _write_f32(buf, es.palette_override)
    buf.write(struct.pack("<B", 1 if es.light_azimuth_deg is not None else 0))
    if es.light_azimuth_deg is not None:
        _write_f32(buf, np.array([es.light_azimuth_deg, es.light_elevation_deg or 0.0]))


def save_scene(model: BasicSceneModel | ComposedScene, path: str | Path, drop_aux: bool = False) -> None:
    """Write a scene file; ``drop_aux`` omits c_ind and SH (final-model form)."""
    comp = as_composed(model)
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<II", VERSION, len(comp.entries)))
    for e in comp.entries:
        _write_scene_trained(buf, e.scene_id, e.scene, drop_aux)
    for e in comp.entries:
        _write_scene_edit(buf, e.visible, e.scene.edit_state)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(buf.getvalue())


def trained_parameter_bytes(path: str | Path) -> bytes:
    """The trained-parameter region of a scene file (edit blocks excluded)."""
    data = Path(path).read_bytes()
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise SceneFormatError("bad magic")
    version = r.u32()
    if version != VERSION:
        raise SceneFormatError(f"unsupported version {version}")
    count = r.u32()
    for _ in range(count):
        _read_scene_trained(r)
    return data[: r.pos]


def _read_scene_trained(r: _Reader):
    sid = r.take(r.u16()).decode("utf-8")
    n = r.u32()
    s = BasicSceneModel.empty()
    s.mu = r.f32(3 * n).reshape(n, 3)
    s.quat = r.f32(4 * n).reshape(n, 4)
    s.log_su = r.f32(n)
    s.log_sv = r.f32(n)
    s.opacity_logit = r.f32(n)
    if r.u8():
        s.c_ind = r.f32(3 * n).reshape(n, 3)
    else:
        s.c_ind = np.zeros((n, 3))
    s.k_a = r.f32(n)
    s.k_d = r.f32(n)
    s.k_s = r.f32(n)
    s.beta = r.f32(n)
    degree = r.i32()
    if degree >= 0:
        k = (degree + 1) ** 2
        s.sh = r.f32(n * k * 3).reshape(n, k, 3)
    s.palette = r.f32(3)
    s.t_size = float(r.f32(1)[0])
    if r.u8():
        dims = np.zeros((n, 2), dtype=np.int64)
        chunks = []
        total = 0
        offs = np.zeros(n, dtype=np.int64)
        for i in range(n):
            u = r.u16()
            v = r.u16()
            dims[i] = (u, v)
            offs[i] = total
            chunks.append(r.f32(u * v * 3).reshape(-1, 3))
            total += u * v
        s.tex_dims = dims
        s.tex_offset = offs
        s.texels = np.concatenate(chunks) if chunks else np.zeros((0, 3))
    s.uses_palette = bool(r.u8())
    return sid, s


def _read_scene_edit(r: _Reader):
    visible = bool(r.u8())
    f = r.f32(5)
    es = EditState(
        opacity_factor=float(f[0]), ka_factor=float(f[1]), kd_factor=float(f[2]),
        ks_factor=float(f[3]), shininess_factor=float(f[4]),
    )
    if r.u8():
        es.palette_override = r.f32(3)
    if r.u8():
        angles = r.f32(2)
        es.light_azimuth_deg = float(angles[0])
        es.light_elevation_deg = float(angles[1])
    return visible, es


def load_scene(path: str | Path) -> ComposedScene:
    data = Path(path).read_bytes()
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise SceneFormatError("bad magic")
    version = r.u32()
    if version != VERSION:
        raise SceneFormatError(f"unsupported version {version}")
    count = r.u32()
    comp = ComposedScene()
    for _ in range(count):
        sid, s = _read_scene_trained(r)
        comp.entries.append(SceneEntry(sid, s))
    for e in comp.entries:
        visible, es = _read_scene_edit(r)
        e.visible = visible
        e.scene.edit_state = es
    if r.pos != len(data):
        raise SceneFormatError("trailing bytes in scene file")
    return comp


def scene_file_size(model: BasicSceneModel | ComposedScene, drop_aux: bool = False) -> dict[str, int]:
    """Closed-form byte accounting of ``save_scene`` output."""
    comp = as_composed(model)
    header = 4 + 4 + 4
    total = header
    per_scene = {}
    for e in comp.entries:
        s = e.scene
        n = s.num_primitives
        geometry = 4 * (3 * n + 4 * n + 2 * n + n)  # mu, quat, log scales, opacity
        shading = 4 * 4 * n
        cind = 0 if drop_aux else 4 * 3 * n
        sh = 0 if (drop_aux or s.sh is None) else 4 * int(np.prod(s.sh.shape))
        texture = 0
        if s.has_texture:
            texture = 4 * n + 12 * int((s.tex_dims[:, 0] * s.tex_dims[:, 1]).sum())
        fixed = 2 + len(e.scene_id.encode()) + 4 + 1 + 4 + 4 * 3 + 4 + 1 + 1
        edit = 1 + 20 + 1 + (12 if s.edit_state.palette_override is not None else 0) + 1 + (
            8 if s.edit_state.light_azimuth_deg is not None else 0
        )
        per_scene[e.scene_id] = {
            "geometry": geometry, "shading": shading, "c_ind": cind, "sh": sh,
            "texture": texture, "fixed": fixed, "edit": edit,
        }
        total += geometry + shading + cind + sh + texture + fixed + edit
    return {"total": total, "scenes": per_scene}
