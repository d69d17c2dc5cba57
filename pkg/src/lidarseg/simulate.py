"""Synthetic spinning-Lidar scanner over scenes of geometric primitives.

Rays are cast from the origin along every (ring, step) beam direction; the
nearest primitive hit gives the cell's range and ground-truth surface id.
Zero-mean Gaussian noise is added to the range along the ray; returns that
leave the sensor window become INVALID (dropout) rather than clamped.

Each primitive face carries its own surface id so the ground truth has
per-face granularity: a box exposes 6 ids, a cylinder 3 (side + 2 caps),
a cone 2 (lateral + base), plane and sphere 1 each.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .scan import Point3, ScanGrid, SensorConfig

_EPS = 1e-12


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    n = float(np.linalg.norm(v))
    if n < _EPS:
        raise ValueError("zero-length direction vector")
    return v / n


def _as_vec3(v) -> np.ndarray:
    out = np.asarray(v, dtype=float).reshape(3)
    if not np.all(np.isfinite(out)):
        raise ValueError("vector components must be finite")
    return out


def _plane_axes(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Deterministic in-plane frame for finite-extent planes.
    a = np.array([1.0, 0.0, 0.0]) if abs(normal[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = _unit(np.cross(normal, a))
    v = np.cross(normal, u)
    return u, v


def rotation_rpy(roll: float = 0.0, pitch: float = 0.0, yaw: float = 0.0) -> np.ndarray:
    """Rotation matrix Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    rx = np.array([[1, 0, 0], [0, cr, -sr], [0, sr, cr]])
    ry = np.array([[cp, 0, sp], [0, 1, 0], [-sp, 0, cp]])
    rz = np.array([[cy, -sy, 0], [sy, cy, 0], [0, 0, 1]])
    return rz @ ry @ rx


@dataclass(frozen=True)
class Plane:
    """Plane through ``point`` with unit ``normal``; optionally a finite
    rectangle with half-sizes ``extent`` along a deterministic in-plane frame."""

    point: np.ndarray
    normal: np.ndarray
    surface_id: int
    extent: tuple[float, float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "point", _as_vec3(self.point))
        object.__setattr__(self, "normal", _unit(self.normal))
        if self.extent is not None:
            hx, hy = float(self.extent[0]), float(self.extent[1])
            if hx <= 0 or hy <= 0:
                raise ValueError("plane extent half-sizes must be > 0")
            object.__setattr__(self, "extent", (hx, hy))

    @property
    def surface_ids(self) -> tuple[int, ...]:
        return (self.surface_id,)

    def intersect(self, origin: np.ndarray, dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        denom = dirs @ self.normal
        offset = float((self.point - origin) @ self.normal)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(np.abs(denom) > _EPS, offset / denom, np.inf)
        t = np.where(t > _EPS, t, np.inf)
        if self.extent is not None:
            u, v = _plane_axes(self.normal)
            hit = origin + t[:, None] * dirs
            rel = hit - self.point
            inside = (np.abs(rel @ u) <= self.extent[0]) & (np.abs(rel @ v) <= self.extent[1])
            t = np.where(inside, t, np.inf)
        face = np.zeros(t.shape, dtype=np.int64)
        return t, face

    def face_normal(self, points: np.ndarray, faces: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.normal, points.shape).copy()


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float
    surface_id: int

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vec3(self.center))
        if self.radius <= 0:
            raise ValueError("sphere radius must be > 0")

    @property
    def surface_ids(self) -> tuple[int, ...]:
        return (self.surface_id,)

    def intersect(self, origin, dirs):
        oc = origin - self.center
        b = dirs @ oc
        c = float(oc @ oc) - self.radius * self.radius
        disc = b * b - c
        with np.errstate(invalid="ignore"):
            sq = np.sqrt(np.maximum(disc, 0.0))
        t0 = -b - sq
        t1 = -b + sq
        t = np.where(t0 > _EPS, t0, np.where(t1 > _EPS, t1, np.inf))
        t = np.where(disc >= 0.0, t, np.inf)
        face = np.zeros(t.shape, dtype=np.int64)
        return t, face

    def face_normal(self, points, faces):
        rel = points - self.center
        return rel / np.linalg.norm(rel, axis=-1, keepdims=True)


@dataclass(frozen=True)
class Cylinder:
    """Finite cylinder: base-cap center ``base``, unit ``axis``, extends to
    base + height*axis.  Faces: 0 side, 1 bottom cap, 2 top cap."""

    base: np.ndarray
    axis: np.ndarray
    radius: float
    height: float
    surface_ids: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "base", _as_vec3(self.base))
        object.__setattr__(self, "axis", _unit(self.axis))
        if self.radius <= 0 or self.height <= 0:
            raise ValueError("cylinder radius and height must be > 0")
        object.__setattr__(self, "surface_ids", tuple(int(i) for i in self.surface_ids))
        if len(self.surface_ids) != 3:
            raise ValueError("cylinder needs 3 surface ids (side, bottom, top)")

    def intersect(self, origin, dirs):
        u = self.axis
        o = origin - self.base
        os_ax = float(o @ u)
        d_ax = dirs @ u
        oc = o - os_ax * u
        dc = dirs - d_ax[:, None] * u
        a = np.einsum("ij,ij->i", dc, dc)
        b = dc @ oc
        c = float(oc @ oc) - self.radius * self.radius
        disc = b * b - a * c
        with np.errstate(invalid="ignore", divide="ignore"):
            sq = np.sqrt(np.maximum(disc, 0.0))
            t0 = np.where(a > _EPS, (-b - sq) / a, np.inf)
            t1 = np.where(a > _EPS, (-b + sq) / a, np.inf)
        best_t = np.full(dirs.shape[0], np.inf)
        best_face = np.zeros(dirs.shape[0], dtype=np.int64)
        with np.errstate(invalid="ignore"):
            for tc in (t0, t1):
                s = os_ax + tc * d_ax
                ok = (disc >= 0.0) & (tc > _EPS) & (s >= 0.0) & (s <= self.height) & (tc < best_t)
                best_t = np.where(ok, tc, best_t)
            # Caps: disks at s = 0 and s = height.
            for face_idx, s_cap in ((1, 0.0), (2, self.height)):
                with np.errstate(divide="ignore"):
                    tc = np.where(np.abs(d_ax) > _EPS, (s_cap - os_ax) / d_ax, np.inf)
                hit = o + np.where(np.isfinite(tc), tc, 0.0)[:, None] * dirs
                radial = hit - (hit @ u)[:, None] * u
                ok = (
                    np.isfinite(tc)
                    & (tc > _EPS)
                    & (np.einsum("ij,ij->i", radial, radial) <= self.radius * self.radius)
                    & (tc < best_t)
                )
                best_t = np.where(ok, tc, best_t)
                best_face = np.where(ok, face_idx, best_face)
        return best_t, best_face

    def face_normal(self, points, faces):
        u = self.axis
        rel = points - self.base
        radial = rel - (rel @ u)[:, None] * u
        with np.errstate(invalid="ignore", divide="ignore"):
            side = radial / np.linalg.norm(radial, axis=-1, keepdims=True)
        out = np.where(faces[:, None] == 0, side, 0.0)
        out = np.where(faces[:, None] == 1, -u, out)
        out = np.where(faces[:, None] == 2, u, out)
        return out


@dataclass(frozen=True)
class Box:
    """Oriented box; ``rotation`` maps box frame to world.  Faces 0..5 are
    (+x, -x, +y, -y, +z, -z) in the box frame."""

    center: np.ndarray
    half_extents: np.ndarray
    surface_ids: tuple[int, ...]
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vec3(self.center))
        he = _as_vec3(self.half_extents)
        if np.any(he <= 0):
            raise ValueError("box half extents must be > 0")
        object.__setattr__(self, "half_extents", he)
        rot = np.asarray(self.rotation, dtype=float).reshape(3, 3)
        if not np.allclose(rot @ rot.T, np.eye(3), atol=1e-9):
            raise ValueError("box rotation must be orthonormal")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "surface_ids", tuple(int(i) for i in self.surface_ids))
        if len(self.surface_ids) != 6:
            raise ValueError("box needs 6 surface ids")

    def intersect(self, origin, dirs):
        # Slab method in the box frame.
        o = (origin - self.center) @ self.rotation  # == R.T @ (origin - center)
        d = dirs @ self.rotation
        h = self.half_extents
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / d
        t_lo = (-h - o) * inv
        t_hi = (h - o) * inv
        # Parallel rays: slab test degenerates to an inside check on that axis.
        parallel = np.abs(d) < _EPS
        inside_axis = np.abs(o) <= h
        t_near_ax = np.where(parallel, np.where(inside_axis, -np.inf, np.inf), np.minimum(t_lo, t_hi))
        t_far_ax = np.where(parallel, np.where(inside_axis, np.inf, -np.inf), np.maximum(t_lo, t_hi))
        t_near = t_near_ax.max(axis=1)
        t_far = t_far_ax.min(axis=1)
        hit = (t_near <= t_far) & (t_far > _EPS)
        t = np.where(t_near > _EPS, t_near, t_far)
        t = np.where(hit, t, np.inf)
        # Entry axis and sign pick the face id.
        axis = np.argmax(t_near_ax, axis=1)
        exit_axis = np.argmin(t_far_ax, axis=1)
        axis = np.where(t_near > _EPS, axis, exit_axis)
        hit_pt = o + np.where(np.isfinite(t), t, 0.0)[:, None] * d
        sign_pos = np.take_along_axis(hit_pt, axis[:, None], axis=1)[:, 0] >= 0.0
        face = axis * 2 + np.where(sign_pos, 0, 1)
        return t, face

    def face_normal(self, points, faces):
        axis = faces // 2
        sign = np.where(faces % 2 == 0, 1.0, -1.0)
        local = np.zeros((points.shape[0], 3))
        local[np.arange(points.shape[0]), axis] = sign
        return local @ self.rotation.T


@dataclass(frozen=True)
class Cone:
    """Finite cone: apex at ``apex``, unit ``axis`` pointing toward the base,
    half-angle in (0, pi/2), base cap at distance ``height`` from the apex.
    Faces: 0 lateral surface, 1 base cap."""

    apex: np.ndarray
    axis: np.ndarray
    half_angle: float
    height: float
    surface_ids: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "apex", _as_vec3(self.apex))
        object.__setattr__(self, "axis", _unit(self.axis))
        if not (0.0 < self.half_angle < np.pi / 2):
            raise ValueError("cone half_angle must be in (0, pi/2)")
        if self.height <= 0:
            raise ValueError("cone height must be > 0")
        object.__setattr__(self, "surface_ids", tuple(int(i) for i in self.surface_ids))
        if len(self.surface_ids) != 2:
            raise ValueError("cone needs 2 surface ids (lateral, base)")

    def intersect(self, origin, dirs):
        u = self.axis
        cos2 = np.cos(self.half_angle) ** 2
        o = origin - self.apex
        d_ax = dirs @ u
        o_ax = float(o @ u)
        d_o = dirs @ o
        a = d_ax * d_ax - cos2
        b = d_ax * o_ax - cos2 * d_o
        c = o_ax * o_ax - cos2 * float(o @ o)
        disc = b * b - a * c
        best_t = np.full(dirs.shape[0], np.inf)
        best_face = np.zeros(dirs.shape[0], dtype=np.int64)
        with np.errstate(invalid="ignore", divide="ignore"):
            sq = np.sqrt(np.maximum(disc, 0.0))
            roots = [
                np.where(np.abs(a) > _EPS, (-b - sq) / a, np.inf),
                np.where(np.abs(a) > _EPS, (-b + sq) / a, np.inf),
                # Linear case (ray parallel to the cone surface direction).
                np.where((np.abs(a) <= _EPS) & (np.abs(b) > _EPS), -c / (2.0 * b), np.inf),
            ]
        with np.errstate(invalid="ignore"):
            for tc in roots:
                s = o_ax + tc * d_ax
                ok = (disc >= 0.0) & (tc > _EPS) & (s >= 0.0) & (s <= self.height) & (tc < best_t)
                best_t = np.where(ok, tc, best_t)
            # Base cap disk.
            with np.errstate(divide="ignore"):
                tc = np.where(np.abs(d_ax) > _EPS, (self.height - o_ax) / d_ax, np.inf)
            hit = o + np.where(np.isfinite(tc), tc, 0.0)[:, None] * dirs
            radial = hit - (hit @ u)[:, None] * u
            r_base = self.height * np.tan(self.half_angle)
            ok = (
                np.isfinite(tc)
                & (tc > _EPS)
                & (np.einsum("ij,ij->i", radial, radial) <= r_base * r_base)
                & (tc < best_t)
            )
            best_t = np.where(ok, tc, best_t)
            best_face = np.where(ok, 1, best_face)
        return best_t, best_face

    def face_normal(self, points, faces):
        u = self.axis
        rel = points - self.apex
        s = rel @ u
        radial = rel - s[:, None] * u
        with np.errstate(invalid="ignore", divide="ignore"):
            rhat = radial / np.linalg.norm(radial, axis=-1, keepdims=True)
        # Lateral normal tilts away from the axis by the half-angle complement.
        lateral = rhat * np.cos(self.half_angle) - u * np.sin(self.half_angle)
        lateral = np.nan_to_num(lateral)
        out = np.where(faces[:, None] == 0, lateral, u)
        return out


Primitive = Plane | Sphere | Cylinder | Box | Cone


@dataclass(frozen=True)
class Scene:
    """Ordered primitives plus the seed of the scan noise stream."""

    primitives: tuple[Primitive, ...]
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "primitives", tuple(self.primitives))
        ids = [i for p in self.primitives for i in p.surface_ids]
        if any(i <= 0 for i in ids):
            raise ValueError("surface ids must be positive")
        if len(set(ids)) != len(ids):
            raise ValueError("surface ids must be unique scene-wide")

    @property
    def surface_ids(self) -> tuple[int, ...]:
        return tuple(i for p in self.primitives for i in p.surface_ids)


def ray_intersect(prim: Primitive, origin, direction) -> tuple[float, int] | None:
    """Smallest t > 0 where the ray origin + t*direction hits the primitive,
    with the id of the face hit; None when the ray misses.

    ``direction`` must be unit length (contract violation otherwise).
    """
    origin = _as_vec3(origin)
    direction = np.asarray(direction, dtype=float).reshape(3)
    if abs(float(np.linalg.norm(direction)) - 1.0) > 1e-9:
        raise ValueError("ray direction must be unit length")
    t, face = prim.intersect(origin, direction[None, :])
    if not np.isfinite(t[0]):
        return None
    return float(t[0]), int(prim.surface_ids[int(face[0])])


def cast_grid(scene: Scene, config: SensorConfig) -> tuple[np.ndarray, np.ndarray]:
    """Noiseless ray cast of every beam: (true ranges, surface ids).

    Cells that hit nothing get range +inf and id 0.  No range-window
    filtering is applied here.
    """
    dirs = config.ray_directions().reshape(-1, 3)
    origin = np.zeros(3)
    best_t = np.full(dirs.shape[0], np.inf)
    best_id = np.zeros(dirs.shape[0], dtype=np.int32)
    for prim in scene.primitives:
        t, face = prim.intersect(origin, dirs)
        ids = np.asarray(prim.surface_ids, dtype=np.int32)[face]
        closer = t < best_t
        best_t = np.where(closer, t, best_t)
        best_id = np.where(closer, ids, best_id)
    shape = (config.rings, config.azimuth_steps)
    return best_t.reshape(shape), best_id.reshape(shape)


def scan_scene(scene: Scene, config: SensorConfig, seed: int | None = None) -> ScanGrid:
    """Simulate one revolution: nearest hit per beam + Gaussian range noise.

    Noise is drawn from a generator seeded with ``seed`` (default: the
    scene's seed) as one row-major (ring, step) block, so grids are bit
    reproducible.  Noisy returns outside [r_min, r_max] become INVALID and
    lose their truth label.
    """
    true_r, ids = cast_grid(scene, config)
    r = true_r.copy()
    if config.noise_sigma > 0.0:
        rng = np.random.default_rng(scene.seed if seed is None else seed)
        noise = rng.normal(0.0, config.noise_sigma, size=r.shape)
        hit = np.isfinite(r)
        r[hit] = r[hit] + noise[hit]
    invalid = ~(np.isfinite(r) & (r >= config.r_min) & (r <= config.r_max))
    r[invalid] = np.nan
    labels = np.where(invalid, 0, ids).astype(np.int32)
    return ScanGrid(config=config, ranges=r, truth_labels=labels)


def scene_normals(scene: Scene, grid: ScanGrid) -> np.ndarray:
    """Analytic outward surface normal per cell, oriented toward the sensor.

    Uses the grid's truth labels to locate the face hit by each cell and
    evaluates that face's normal at the cell's Cartesian point.  Cells with
    label 0 get NaN rows.  Shape (rings, steps, 3).
    """
    if grid.truth_labels is None:
        raise ValueError("grid has no truth labels")
    pts = grid.points().reshape(-1, 3)
    labels = grid.truth_labels.reshape(-1)
    out = np.full((labels.size, 3), np.nan)
    for prim in scene.primitives:
        ids = np.asarray(prim.surface_ids, dtype=np.int32)
        for face_idx, sid in enumerate(ids):
            sel = labels == sid
            if not np.any(sel):
                continue
            faces = np.full(int(sel.sum()), face_idx, dtype=np.int64)
            n = prim.face_normal(pts[sel], faces)
            # Orient toward the sensor at the origin.
            flip = np.einsum("ij,ij->i", n, pts[sel]) > 0.0
            n[flip] *= -1.0
            out[sel] = n
    return out.reshape(grid.rings, grid.steps, 3)
