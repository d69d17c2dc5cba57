import numpy as np
import pytest

from lidarseg import Plane, ScanGrid, Scene, SensorConfig, scan_scene


def make_config(rings=4, steps=8, r_min=0.5, r_max=100.0, top_deg=10.0, bottom_deg=-30.0,
                noise_sigma=0.0):
    return SensorConfig.uniform(rings=rings, top_deg=top_deg, bottom_deg=bottom_deg,
                                azimuth_steps=steps, r_min=r_min, r_max=r_max,
                                noise_sigma=noise_sigma)


def full_grid(rings=4, steps=8, value=5.0, **kwargs):
    """Fully valid grid with a constant range."""
    cfg = make_config(rings=rings, steps=steps, **kwargs)
    return ScanGrid(config=cfg, ranges=np.full((rings, steps), value))


def masked_grid(mask, value=5.0, **kwargs):
    """Grid valid exactly where ``mask`` is True."""
    mask = np.asarray(mask, dtype=bool)
    cfg = make_config(rings=mask.shape[0], steps=mask.shape[1], **kwargs)
    ranges = np.where(mask, value, np.nan)
    return ScanGrid(config=cfg, ranges=ranges)


def random_smooth_grid(rng, rings=6, steps=16, keep=1.0):
    """Valid-ish grid with mild range variation and a random invalid mask."""
    cfg = make_config(rings=rings, steps=steps)
    ranges = 5.0 + rng.uniform(-0.5, 0.5, size=(rings, steps))
    drop = rng.random((rings, steps)) > keep
    ranges[drop] = np.nan
    return ScanGrid(config=cfg, ranges=ranges)


@pytest.fixture
def ground_scene():
    return Scene(primitives=(Plane(point=(0.0, 0.0, -1.0), normal=(0.0, 0.0, 1.0), surface_id=1),),
                 seed=7)


@pytest.fixture
def ground_scan(ground_scene):
    cfg = make_config(rings=16, steps=90, bottom_deg=-40.0)
    return scan_scene(ground_scene, cfg)
