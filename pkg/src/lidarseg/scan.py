"""Organized scan-grid data model for spinning-Lidar range images.

A spinning Lidar rotates a vertical array of laser rangefinders about +z.
Each revolution yields a dense (rings x azimuth-steps) grid of ranges; a
cell either holds a finite range in meters or the INVALID sentinel (NaN)
for a missed / out-of-window return.

Coordinate convention (z-up): elevation ``theta`` is measured from the
horizontal plane, azimuth ``phi`` counter-clockwise from +x when viewed
from above, so

    x = r * cos(theta) * cos(phi)
    y = r * cos(theta) * sin(phi)
    z = r * sin(theta)

Ring 0 is the topmost sensor (largest elevation); azimuth step j maps to
phi = 2*pi*j / step_count, so the last step sits one increment before the
wrap back to step 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

# Sentinel stored in range grids for cells with no usable return.
INVALID = float("nan")


class GridIndex(NamedTuple):
    """(ring, step) coordinate of a cell in the scan grid."""

    ring: int
    step: int


class Point3(NamedTuple):
    """Cartesian point in meters."""

    x: float
    y: float
    z: float


def _uniform_elevations(rings: int, top_deg: float, bottom_deg: float) -> np.ndarray:
    return np.radians(np.linspace(top_deg, bottom_deg, rings))


@dataclass(frozen=True)
class SensorConfig:
    """Geometry and range window of a spinning Lidar.

    Parameters
    ----------
    ring_elevations : array-like
        Fixed vertical angles in radians, ordered top (largest) to bottom,
        strictly decreasing, at least 2 entries.
    azimuth_steps : int
        Number of firings per revolution (>= 3).
    r_min, r_max : float
        Valid range window in meters, 0 < r_min < r_max.
    noise_sigma : float
        Std-dev of additive range noise in meters (simulator only).
    """

    ring_elevations: np.ndarray
    azimuth_steps: int = 1800
    r_min: float = 0.5
    r_max: float = 100.0
    noise_sigma: float = 0.0

    def __post_init__(self):
        elev = np.array(self.ring_elevations, dtype=float).reshape(-1)
        if elev.size < 2:
            raise ValueError("ring_elevations needs at least 2 entries")
        if not np.all(np.diff(elev) < 0.0):
            raise ValueError("ring_elevations must be strictly decreasing (top to bottom)")
        elev.flags.writeable = False
        object.__setattr__(self, "ring_elevations", elev)
        if int(self.azimuth_steps) < 3:
            raise ValueError("azimuth_steps must be >= 3")
        object.__setattr__(self, "azimuth_steps", int(self.azimuth_steps))
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError("require 0 < r_min < r_max")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")

    @classmethod
    def uniform(
        cls,
        rings: int = 32,
        top_deg: float = 10.67,
        bottom_deg: float = -30.67,
        azimuth_steps: int = 1800,
        r_min: float = 0.5,
        r_max: float = 100.0,
        noise_sigma: float = 0.0,
    ) -> "SensorConfig":
        """Sensor with uniformly spaced ring elevations (HDL-32E-like span)."""
        return cls(
            ring_elevations=_uniform_elevations(rings, top_deg, bottom_deg),
            azimuth_steps=azimuth_steps,
            r_min=r_min,
            r_max=r_max,
            noise_sigma=noise_sigma,
        )

    @classmethod
    def default(cls) -> "SensorConfig":
        """32 rings, 0.2 deg azimuth resolution (1800 firings), sigma=0.1 m."""
        return cls.uniform(noise_sigma=0.1)

    @property
    def rings(self) -> int:
        return int(self.ring_elevations.size)

    def azimuth(self, step) -> float | np.ndarray:
        """Azimuth angle phi in radians for a step index (scalar or array)."""
        return 2.0 * np.pi * np.asarray(step) / self.azimuth_steps

    def ray_direction(self, ring: int, step: int) -> np.ndarray:
        """Unit direction of the (ring, step) beam."""
        theta = self.ring_elevations[ring]
        phi = self.azimuth(step)
        ct = np.cos(theta)
        return np.array([ct * np.cos(phi), ct * np.sin(phi), np.sin(theta)])

    def ray_directions(self) -> np.ndarray:
        """Unit beam directions for the whole grid, shape (rings, steps, 3)."""
        theta = self.ring_elevations[:, None]
        phi = self.azimuth(np.arange(self.azimuth_steps))[None, :]
        ct = np.cos(theta)
        out = np.empty((self.rings, self.azimuth_steps, 3))
        out[:, :, 0] = ct * np.cos(phi)
        out[:, :, 1] = ct * np.sin(phi)
        out[:, :, 2] = np.broadcast_to(np.sin(theta), out.shape[:2])
        return out


@dataclass(frozen=True)
class ScanGrid:
    """One revolution of range returns on the (ring, step) grid.

    ``ranges`` is a dense (rings, steps) float array with NaN for INVALID
    cells.  ``truth_labels`` optionally carries per-cell ground-truth
    surface ids from the simulator (0 = none), same shape, int dtype.
    """

    config: SensorConfig
    ranges: np.ndarray
    truth_labels: np.ndarray | None = None

    def __post_init__(self):
        ranges = np.array(self.ranges, dtype=float)
        shape = (self.config.rings, self.config.azimuth_steps)
        if ranges.shape != shape:
            raise ValueError(f"ranges shape {ranges.shape} != sensor grid {shape}")
        ranges.flags.writeable = False
        object.__setattr__(self, "ranges", ranges)
        if self.truth_labels is not None:
            labels = np.array(self.truth_labels, dtype=np.int32)
            if labels.shape != shape:
                raise ValueError(f"truth_labels shape {labels.shape} != sensor grid {shape}")
            labels.flags.writeable = False
            object.__setattr__(self, "truth_labels", labels)

    @property
    def rings(self) -> int:
        return self.config.rings

    @property
    def steps(self) -> int:
        return self.config.azimuth_steps

    @property
    def valid_mask(self) -> np.ndarray:
        """Boolean mask of cells holding a finite range inside [r_min, r_max]."""
        r = self.ranges
        cfg = self.config
        return np.isfinite(r) & (r >= cfg.r_min) & (r <= cfg.r_max)

    def points(self) -> np.ndarray:
        """Cartesian embedding of every cell, shape (rings, steps, 3), NaN rows
        for invalid cells."""
        dirs = self.config.ray_directions()
        pts = dirs * self.ranges[:, :, None]
        pts[~self.valid_mask] = np.nan
        return pts

    def valid_points(self) -> np.ndarray:
        """Cartesian points of valid cells only, shape (P, 3), row-major order."""
        pts = self.config.ray_directions() * self.ranges[:, :, None]
        return pts[self.valid_mask]


def polar_to_cartesian(config: SensorConfig, idx: GridIndex, r: float) -> Point3:
    """Convert one (ring, step, range) sample to Cartesian coordinates.

    Raises ValueError for an out-of-bounds index or a non-finite / out-of
    window range (contract violation).
    """
    ring, step = int(idx[0]), int(idx[1])
    if not (0 <= ring < config.rings and 0 <= step < config.azimuth_steps):
        raise ValueError(f"grid index ({ring}, {step}) out of bounds")
    if not np.isfinite(r) or not (config.r_min <= r <= config.r_max):
        raise ValueError(f"range {r!r} outside valid window")
    theta = config.ring_elevations[ring]
    phi = 2.0 * np.pi * step / config.azimuth_steps
    ct = np.cos(theta)
    return Point3(r * ct * np.cos(phi), r * ct * np.sin(phi), r * np.sin(theta))


def subsample_steps(config: SensorConfig, interval: int) -> np.ndarray:
    """Azimuth step indices kept when skipping ``interval - 1`` steps at a time.

    Returns {0, interval, 2*interval, ...} <= m as an int array.  The sub
    sampled ring still wraps: the last kept step connects back to step 0.
    """
    interval = int(interval)
    m = config.azimuth_steps - 1
    if not (1 <= interval <= m):
        raise ValueError(f"interval {interval} not in [1, {m}]")
    return np.arange(0, m + 1, interval, dtype=np.int64)


def valid_point(grid: ScanGrid, idx: GridIndex) -> bool:
    """True iff the cell holds a finite range inside the sensor window."""
    ring, step = int(idx[0]), int(idx[1])
    if not (0 <= ring < grid.rings and 0 <= step < grid.steps):
        raise ValueError(f"grid index ({ring}, {step}) out of bounds")
    r = grid.ranges[ring, step]
    return bool(np.isfinite(r) and grid.config.r_min <= r <= grid.config.r_max)
