"""Parameterized random scenes: a ground plane plus primitive objects.

Generates benchmark environments in the spirit of "standard objects on a
flat surface": spheres, boxes, cylinders and cones resting on the ground,
spread in range and azimuth around the sensor with optional crowding so
objects occlude the ground and each other.
"""

from __future__ import annotations

import numpy as np

from .simulate import Box, Cone, Cylinder, Plane, Primitive, Scene, Sphere, rotation_rpy

GROUND_ID = 1


def generate_scene(
    seed: int,
    n_objects: int | tuple[int, int] = (2, 5),
    range_span: tuple[float, float] = (8.0, 30.0),
    size_span: tuple[float, float] = (1.2, 3.5),
    sensor_height: float = 1.5,
    crowding: float = 0.0,
) -> Scene:
    """Build a deterministic random scene for the given seed.

    Parameters
    ----------
    seed : int
        Drives both object placement and (later) the scan noise stream.
    n_objects : int or (lo, hi)
        Number of primitives on top of the ground plane.
    range_span : (float, float)
        Horizontal distance window from the sensor in meters.
    size_span : (float, float)
        Characteristic object size window in meters.
    sensor_height : float
        Sensor sits this far above the ground plane.
    crowding : float in [0, 1]
        0 spreads objects over the full sweep; towards 1 they bunch into a
        narrow azimuth sector, raising the occlusion level.
    """
    rng = np.random.default_rng(seed)
    if isinstance(n_objects, tuple):
        count = int(rng.integers(n_objects[0], n_objects[1] + 1))
    else:
        count = int(n_objects)
    ground = Plane(point=(0.0, 0.0, -sensor_height), normal=(0.0, 0.0, 1.0), surface_id=GROUND_ID)
    prims: list[Primitive] = [ground]
    next_id = GROUND_ID + 1
    sector = 2.0 * np.pi * (1.0 - 0.85 * float(np.clip(crowding, 0.0, 1.0)))
    phi0 = rng.uniform(0.0, 2.0 * np.pi)
    for _ in range(count):
        kind = rng.integers(0, 4)
        dist = rng.uniform(*range_span)
        phi = phi0 + rng.uniform(0.0, sector)
        size = rng.uniform(*size_span)
        x, y = dist * np.cos(phi), dist * np.sin(phi)
        z0 = -sensor_height  # ground level
        if kind == 0:
            prims.append(Sphere(center=(x, y, z0 + size), radius=size, surface_id=next_id))
            next_id += 1
        elif kind == 1:
            yaw = rng.uniform(0.0, 2.0 * np.pi)
            h = size * rng.uniform(0.6, 1.4)
            half = (size, size * rng.uniform(0.5, 1.0), h)
            prims.append(
                Box(
                    center=(x, y, z0 + h),
                    half_extents=half,
                    rotation=rotation_rpy(yaw=yaw),
                    surface_ids=tuple(range(next_id, next_id + 6)),
                )
            )
            next_id += 6
        elif kind == 2:
            h = 2.0 * size * rng.uniform(0.8, 1.5)
            prims.append(
                Cylinder(
                    base=(x, y, z0),
                    axis=(0.0, 0.0, 1.0),
                    radius=size * rng.uniform(0.5, 1.0),
                    height=h,
                    surface_ids=tuple(range(next_id, next_id + 3)),
                )
            )
            next_id += 3
        else:
            h = 2.0 * size * rng.uniform(0.8, 1.3)
            half_angle = np.arctan(size / h)
            prims.append(
                Cone(
                    apex=(x, y, z0 + h),
                    axis=(0.0, 0.0, -1.0),
                    half_angle=half_angle,
                    height=h,
                    surface_ids=(next_id, next_id + 1),
                )
            )
            next_id += 2
    return Scene(primitives=tuple(prims), seed=seed)


def generate_suite(base_seed: int, count: int, **kwargs) -> list[Scene]:
    """A list of scenes with consecutive seeds and increasing crowding."""
    scenes = []
    for k in range(count):
        crowd = (k / max(count - 1, 1)) * 0.6
        scenes.append(generate_scene(base_seed + k, crowding=crowd, **kwargs))
    return scenes
