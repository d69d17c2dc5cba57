import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lidarseg import (
    GridIndex,
    ScanGrid,
    SensorConfig,
    polar_to_cartesian,
    subsample_steps,
    valid_point,
)
from conftest import make_config


def axis_config(steps=36):
    # Ring 0 at the pole, ring 1 in the horizontal plane.
    return SensorConfig(ring_elevations=np.radians([90.0, 0.0, -45.0]), azimuth_steps=steps)


class TestPolarToCartesian:
    def test_x_axis(self):
        p = polar_to_cartesian(axis_config(), GridIndex(1, 0), 1.0)
        assert np.allclose(p, (1.0, 0.0, 0.0), atol=1e-12)

    def test_pole(self):
        cfg = axis_config()
        for step in (0, 5, 17):
            p = polar_to_cartesian(cfg, GridIndex(0, step), 2.0)
            assert np.allclose(p, (0.0, 0.0, 2.0), atol=1e-12)

    def test_y_axis(self):
        # steps=36 puts phi=90deg at step 9.
        p = polar_to_cartesian(axis_config(), GridIndex(1, 9), 3.0)
        assert np.allclose(p, (0.0, 3.0, 0.0), atol=1e-12)

    def test_out_of_bounds_index(self):
        cfg = axis_config()
        with pytest.raises(ValueError):
            polar_to_cartesian(cfg, GridIndex(3, 0), 1.0)
        with pytest.raises(ValueError):
            polar_to_cartesian(cfg, GridIndex(0, 36), 1.0)

    def test_bad_range(self):
        cfg = axis_config()
        with pytest.raises(ValueError):
            polar_to_cartesian(cfg, GridIndex(0, 0), np.nan)
        with pytest.raises(ValueError):
            polar_to_cartesian(cfg, GridIndex(0, 0), cfg.r_max * 2.0)

    @settings(max_examples=200, deadline=None)
    @given(
        ring=st.integers(0, 2),
        step=st.integers(0, 35),
        r=st.floats(0.5, 100.0, allow_nan=False),
    )
    def test_round_trip_radius(self, ring, step, r):
        p = polar_to_cartesian(axis_config(), GridIndex(ring, step), r)
        assert np.isclose(np.linalg.norm(p), r, rtol=1e-9)

    def test_matches_ray_directions(self):
        cfg = make_config(rings=5, steps=12)
        dirs = cfg.ray_directions()
        for ring in range(5):
            for step in range(12):
                p = polar_to_cartesian(cfg, GridIndex(ring, step), 2.5)
                assert np.allclose(p, 2.5 * dirs[ring, step], atol=1e-12)


class TestSubsample:
    def test_identity(self):
        cfg = make_config(steps=10)
        assert subsample_steps(cfg, 1).tolist() == list(range(10))

    def test_half(self):
        cfg = make_config(steps=10)
        assert subsample_steps(cfg, 5).tolist() == [0, 5]

    def test_paper_interval_five(self):
        # 1800 firings, every 5th kept -> 360 steps, one per degree of sweep.
        cfg = make_config(steps=1800)
        kept = subsample_steps(cfg, 5)
        assert kept.size == 360
        assert kept[0] == 0 and kept[-1] == 1795
        assert np.all(np.diff(kept) == 5)

    @given(steps=st.integers(4, 200), interval=st.integers(1, 100))
    def test_properties(self, steps, interval):
        cfg = make_config(steps=steps)
        m = steps - 1
        if not (1 <= interval <= m):
            with pytest.raises(ValueError):
                subsample_steps(cfg, interval)
            return
        kept = subsample_steps(cfg, interval)
        assert kept[0] == 0
        assert np.all(np.diff(kept) == interval)
        assert kept[-1] <= m
        assert kept[-1] + interval > m  # nothing more could be kept

    def test_interval_errors(self):
        cfg = make_config(steps=10)
        for bad in (0, -1, 10, 11):
            with pytest.raises(ValueError):
                subsample_steps(cfg, bad)


class TestValidPoint:
    def grid(self):
        cfg = make_config(rings=2, steps=3, r_min=1.0, r_max=10.0)
        ranges = np.array([[np.nan, 1.0, 15.0], [5.0, 0.5, np.inf]])
        return ScanGrid(config=cfg, ranges=ranges)

    def test_cases(self):
        g = self.grid()
        assert not valid_point(g, GridIndex(0, 0))  # INVALID sentinel
        assert valid_point(g, GridIndex(0, 1))      # r_min inclusive
        assert not valid_point(g, GridIndex(0, 2))  # 1.5 * r_max
        assert valid_point(g, GridIndex(1, 0))
        assert not valid_point(g, GridIndex(1, 1))  # below r_min
        assert not valid_point(g, GridIndex(1, 2))  # inf
        assert g.valid_mask.sum() == 2

    def test_out_of_bounds(self):
        with pytest.raises(ValueError):
            valid_point(self.grid(), GridIndex(2, 0))


class TestConfigValidation:
    def test_elevations_must_decrease(self):
        with pytest.raises(ValueError):
            SensorConfig(ring_elevations=[0.0, 0.1], azimuth_steps=10)

    def test_too_few_rings(self):
        with pytest.raises(ValueError):
            SensorConfig(ring_elevations=[0.0], azimuth_steps=10)

    def test_window(self):
        with pytest.raises(ValueError):
            SensorConfig(ring_elevations=[0.1, 0.0], azimuth_steps=10, r_min=2.0, r_max=1.0)

    def test_min_steps(self):
        with pytest.raises(ValueError):
            SensorConfig(ring_elevations=[0.1, 0.0], azimuth_steps=2)

    def test_default_shape(self):
        cfg = SensorConfig.default()
        assert cfg.rings == 32 and cfg.azimuth_steps == 1800
        assert np.isclose(np.degrees(cfg.ring_elevations[0]), 10.67)
        assert np.isclose(np.degrees(cfg.ring_elevations[-1]), -30.67)
        assert cfg.noise_sigma == 0.1


class TestScanGrid:
    def test_shape_mismatch(self):
        cfg = make_config(rings=2, steps=4)
        with pytest.raises(ValueError):
            ScanGrid(config=cfg, ranges=np.zeros((2, 3)))

    def test_immutable(self):
        cfg = make_config(rings=2, steps=3)
        g = ScanGrid(config=cfg, ranges=np.full((2, 3), 5.0))
        with pytest.raises(ValueError):
            g.ranges[0, 0] = 1.0

    def test_all_invalid_is_legal(self):
        cfg = make_config(rings=2, steps=3)
        g = ScanGrid(config=cfg, ranges=np.full((2, 3), np.nan))
        assert g.valid_mask.sum() == 0
        assert g.valid_points().shape == (0, 3)

    def test_points_nan_on_invalid(self):
        cfg = make_config(rings=2, steps=3)
        ranges = np.array([[5.0, np.nan, 5.0], [np.nan, 5.0, np.nan]])
        pts = ScanGrid(config=cfg, ranges=ranges).points()
        assert np.all(np.isfinite(pts[0, 0]))
        assert np.all(np.isnan(pts[0, 1]))
