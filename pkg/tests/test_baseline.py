import numpy as np
import pytest
from scipy.spatial import cKDTree

from lidarseg import BaselineConfig, baseline_segment, pca_normals


def plane_points(n_side=20, spacing=0.1, z=0.0, origin=(0.0, 0.0)):
    xs = origin[0] + spacing * np.arange(n_side)
    ys = origin[1] + spacing * np.arange(n_side)
    gx, gy = np.meshgrid(xs, ys)
    return np.stack([gx.ravel(), gy.ravel(), np.full(gx.size, z)], axis=1)


class TestPcaNormals:
    def test_exact_plane_normal(self):
        pts = plane_points()
        tree = cKDTree(pts)
        _, idx = tree.query(pts, k=10)
        normals, curvature = pca_normals(pts, idx)
        # up to sign
        assert np.allclose(np.abs(normals[:, 2]), 1.0, atol=1e-6)
        assert np.allclose(normals[:, :2], 0.0, atol=1e-6)
        assert np.allclose(curvature, 0.0, atol=1e-9)

    def test_tilted_plane(self):
        rng = np.random.default_rng(0)
        n = np.array([1.0, 2.0, 3.0])
        n = n / np.linalg.norm(n)
        u = np.cross(n, [0, 0, 1.0])
        u /= np.linalg.norm(u)
        v = np.cross(n, u)
        coef = rng.uniform(-1, 1, size=(300, 2))
        pts = coef[:, :1] * u + coef[:, 1:] * v
        tree = cKDTree(pts)
        _, idx = tree.query(pts, k=12)
        normals, _ = pca_normals(pts, idx)
        dots = np.abs(normals @ n)
        assert np.allclose(dots, 1.0, atol=1e-6)


class TestBaselineSegment:
    def test_single_plane_single_cluster(self):
        pts = plane_points(25)
        labels = baseline_segment(pts, BaselineConfig(k_neighbors=15, min_cluster_size=20))
        assert set(labels.tolist()) == {1}

    def test_two_separated_planes(self):
        a = plane_points(20, z=0.0)
        b = plane_points(20, z=10.0)
        pts = np.concatenate([a, b])
        cfg = BaselineConfig(k_neighbors=15, min_cluster_size=20)
        # oracle: the k-NN graph has no edge crossing the 10 m gap
        tree = cKDTree(pts)
        dist, idx = tree.query(pts, k=cfg.k_neighbors + 1)
        half = a.shape[0]
        assert not np.any((idx[:half] >= half) & np.isfinite(dist[:half]))
        labels = baseline_segment(pts, cfg)
        assert set(labels.tolist()) == {1, 2}
        assert len(set(labels[:half].tolist())) == 1
        assert len(set(labels[half:].tolist())) == 1

    def test_angle_threshold_splits_roof(self):
        # Two planes meeting at a sharp ridge: 45 deg apart >> 3 deg limit.
        left = plane_points(20, spacing=0.1)
        right = plane_points(20, spacing=0.1).copy()
        right[:, 2] = right[:, 0] - left[:, 0].max()  # 45 deg slope
        right[:, 0] += left[:, 0].max() + 0.1
        pts = np.concatenate([left, right])
        labels = baseline_segment(pts, BaselineConfig(k_neighbors=8, min_cluster_size=30))
        half = left.shape[0]
        assert len(set(labels[:half].tolist()) - {0}) == 1
        assert len(set(labels[half:].tolist()) - {0}) == 1
        assert (set(labels[:half].tolist()) - {0}) != (set(labels[half:].tolist()) - {0})

    def test_small_clusters_labeled_zero(self):
        pts = np.concatenate([plane_points(20), plane_points(3, z=50.0)])
        labels = baseline_segment(pts, BaselineConfig(k_neighbors=5, min_cluster_size=20))
        assert np.all(labels[-9:] == 0)
        assert np.all(labels[:-9] == 1)

    def test_determinism_smoke(self):
        rng = np.random.default_rng(7)
        pts = rng.uniform(-1, 1, size=(10, 3))
        cfg = BaselineConfig(k_neighbors=9, min_cluster_size=1)
        a = baseline_segment(pts, cfg)
        b = baseline_segment(pts, cfg)
        np.testing.assert_array_equal(a, b)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            baseline_segment(np.zeros((5, 3)), BaselineConfig(k_neighbors=10))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            BaselineConfig(k_neighbors=2)
        with pytest.raises(ValueError):
            BaselineConfig(angle_threshold=2.0)
