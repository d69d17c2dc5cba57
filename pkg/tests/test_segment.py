import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from lidarseg import (
    NormalMap,
    ScanGrid,
    SegmenterConfig,
    backfill,
    build_mesh,
    estimate_normals,
    prune_small,
    segment,
)
from conftest import make_config, masked_grid, random_smooth_grid


def normals_from_array(mesh, directions, absent=()):
    """NormalMap with prescribed unit normals per node."""
    values = np.asarray(directions, dtype=float)
    values = values / np.linalg.norm(values, axis=1, keepdims=True)
    mask = np.ones(mesh.n_nodes, dtype=bool)
    values = values.copy()
    for nid in absent:
        mask[nid] = False
        values[nid] = np.nan
    return NormalMap(values=values, mask=mask)


def random_normal_map(rng, mesh, missing=0.1):
    vals = rng.normal(size=(mesh.n_nodes, 3))
    vals /= np.linalg.norm(vals, axis=1, keepdims=True)
    absent = np.nonzero(rng.random(mesh.n_nodes) < missing)[0]
    return normals_from_array(mesh, vals, absent=absent)


def cc_oracle(mesh, normals, cfg):
    """Brute-force reference: connected components of the graph whose edges
    are mesh edges passing the (symmetric) threshold test."""
    n = mesh.n_nodes
    src, dst = [], []
    for p in range(n):
        if not normals.mask[p]:
            continue
        for q in mesh.neighbors[p]:
            if q >= 0 and normals.mask[q]:
                if np.all(np.abs(normals.values[p] - normals.values[q]) < cfg.thresholds):
                    src.append(p)
                    dst.append(q)
    adj = sp.coo_matrix((np.ones(len(src)), (src, dst)), shape=(n, n))
    _, comp = connected_components(adj, directed=False)
    return comp


def canonical(labels):
    """Renumber labels by first occurrence so partitions compare directly."""
    out = np.zeros(len(labels), dtype=np.int64)
    seen = {}
    for i, v in enumerate(labels):
        out[i] = seen.setdefault(v, len(seen) + 1)
    return out


def node_labels(mesh, dense):
    return dense[mesh.node_rings, mesh.node_steps]


class TestSegment:
    def test_uniform_normals_single_label(self):
        grid = masked_grid(np.ones((4, 8), dtype=bool))
        mesh = build_mesh(grid, 1)
        nm = normals_from_array(mesh, np.tile([0.0, 0.0, 1.0], (mesh.n_nodes, 1)))
        dense = segment(mesh, nm, SegmenterConfig())
        labels = node_labels(mesh, dense)
        assert np.all(labels == 1)

    def test_two_regions_blocked_at_boundary(self):
        grid = masked_grid(np.ones((4, 8), dtype=bool))
        mesh = build_mesh(grid, 1)
        dirs = np.zeros((mesh.n_nodes, 3))
        left = mesh.node_steps < 4
        dirs[left] = [0.0, 0.0, 1.0]
        dirs[~left] = [1.0, 0.0, 0.0]
        dense = segment(mesh, normals_from_array(mesh, dirs), SegmenterConfig())
        labels = node_labels(mesh, dense)
        assert len(np.unique(labels)) == 2
        # |delta i-hat| = 1 >= 0.2 blocks propagation across the boundary
        assert len(np.unique(labels[left])) == 1
        assert len(np.unique(labels[~left])) == 1

    def test_small_difference_propagates(self):
        grid = masked_grid(np.ones((2, 6), dtype=bool))
        mesh = build_mesh(grid, 1)
        dirs = np.tile([0.0, 0.0, 1.0], (mesh.n_nodes, 1))
        # 0.1 per component differences stay strictly inside 0.2 thresholds
        bump = np.array([0.1, 0.1, 0.1])
        dirs[mesh.node_steps >= 3] = np.array([0.0, 0.0, 1.0]) + bump
        nm = NormalMap(values=dirs, mask=np.ones(mesh.n_nodes, dtype=bool))
        dense = segment(mesh, nm, SegmenterConfig())
        assert len(np.unique(node_labels(mesh, dense))) == 1

    def test_exact_threshold_blocks(self):
        # strict inequality: |diff| == threshold must NOT propagate
        grid = masked_grid(np.ones((2, 4), dtype=bool))
        mesh = build_mesh(grid, 1)
        dirs = np.tile([0.0, 0.0, 1.0], (mesh.n_nodes, 1))
        dirs[mesh.node_steps >= 2] = [0.2, 0.0, 1.0]
        nm = NormalMap(values=dirs, mask=np.ones(mesh.n_nodes, dtype=bool))
        dense = segment(mesh, nm, SegmenterConfig(threshold_i=0.2))
        assert len(np.unique(node_labels(mesh, dense))) == 2

    def test_nodes_without_normals_stay_zero(self):
        grid = masked_grid(np.ones((3, 6), dtype=bool))
        mesh = build_mesh(grid, 1)
        nm = random_normal_map(np.random.default_rng(0), mesh, missing=0.3)
        dense = segment(mesh, nm, SegmenterConfig())
        labels = node_labels(mesh, dense)
        assert np.all((labels == 0) == ~nm.mask)

    def test_first_touch_label_order(self):
        rng = np.random.default_rng(1)
        grid = random_smooth_grid(rng, rings=6, steps=12, keep=0.8)
        mesh = build_mesh(grid, 1)
        nm = random_normal_map(rng, mesh)
        dense = segment(mesh, nm, SegmenterConfig(threshold_i=0.5, threshold_j=0.5, threshold_k=0.5))
        labels = node_labels(mesh, dense)
        present = labels[labels > 0]
        uniq = np.unique(present)
        assert uniq.tolist() == list(range(1, uniq.size + 1))
        # first occurrence of label v precedes first occurrence of v+1
        firsts = [np.argmax(labels == v) for v in uniq]
        assert firsts == sorted(firsts)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_connected_components_oracle(self, seed):
        rng = np.random.default_rng(seed)
        grid = random_smooth_grid(rng, rings=8, steps=16, keep=0.75)
        mesh = build_mesh(grid, 1)
        nm = random_normal_map(rng, mesh, missing=0.15)
        cfg = SegmenterConfig(threshold_i=rng.uniform(0.2, 1.2),
                              threshold_j=rng.uniform(0.2, 1.2),
                              threshold_k=rng.uniform(0.2, 1.2))
        labels = node_labels(mesh, segment(mesh, nm, cfg))
        comp = cc_oracle(mesh, nm, cfg)
        have = np.nonzero(nm.mask)[0]
        assert np.array_equal(canonical(labels[have]), canonical(comp[have]))

    def test_determinism(self):
        rng = np.random.default_rng(2)
        grid = random_smooth_grid(rng, rings=6, steps=14)
        mesh = build_mesh(grid, 1)
        nm = random_normal_map(rng, mesh)
        cfg = SegmenterConfig()
        a = segment(mesh, nm, cfg)
        b = segment(mesh, nm, cfg)
        np.testing.assert_array_equal(a, b)

    def test_threshold_monotonicity(self):
        rng = np.random.default_rng(3)
        grid = random_smooth_grid(rng, rings=8, steps=16)
        mesh = build_mesh(grid, 1)
        nm = random_normal_map(rng, mesh, missing=0.0)
        counts = []
        for t in (0.1, 0.3, 0.6, 1.0, 2.0):
            cfg = SegmenterConfig(threshold_i=t, threshold_j=t, threshold_k=t)
            counts.append(node_labels(mesh, segment(mesh, nm, cfg)).max())
        assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_segments_connected_in_mesh(self):
        rng = np.random.default_rng(4)
        grid = random_smooth_grid(rng, rings=8, steps=16, keep=0.8)
        mesh = build_mesh(grid, 1)
        nm = random_normal_map(rng, mesh)
        cfg = SegmenterConfig(threshold_i=0.7, threshold_j=0.7, threshold_k=0.7)
        labels = node_labels(mesh, segment(mesh, nm, cfg))
        # Each label's node set must be connected in the (unthresholded) mesh.
        n = mesh.n_nodes
        src = np.repeat(np.arange(n), 6)
        dst = mesh.neighbors.reshape(-1)
        ok = dst >= 0
        adj = sp.coo_matrix((np.ones(ok.sum()), (src[ok], dst[ok])), shape=(n, n))
        for v in np.unique(labels[labels > 0]):
            nodes = np.nonzero(labels == v)[0]
            sub = adj.tocsr()[nodes][:, nodes]
            ncomp, _ = connected_components(sub, directed=False)
            assert ncomp == 1


class TestBackfill:
    def grid_row(self, width=10, rings=2):
        cfg = make_config(rings=rings, steps=width)
        return ScanGrid(config=cfg, ranges=np.full((rings, width), 5.0))

    def test_nearest_donor(self):
        g = self.grid_row()
        labels = np.zeros((2, 10), dtype=np.int32)
        labels[0, 0] = 1
        labels[0, 5] = 2
        out = backfill(g, labels)
        # step 3: distance 3 to step 0, 2 to step 5 -> takes label 2
        assert out[0, 3] == 2
        # step 2: distance 2 to step 0, 3 to step 5 -> takes label 1
        assert out[0, 2] == 1
        # wrap: step 9 is distance 1 from step 0
        assert out[0, 9] == 1

    def test_tie_breaks_to_smaller_step(self):
        g = self.grid_row()
        labels = np.zeros((2, 10), dtype=np.int32)
        labels[0, 0] = 1
        labels[0, 4] = 2
        out = backfill(g, labels)
        assert out[0, 2] == 1  # equidistant to steps 0 and 4

    def test_fully_labeled_identity(self):
        g = self.grid_row()
        labels = np.arange(20, dtype=np.int32).reshape(2, 10) + 1
        np.testing.assert_array_equal(backfill(g, labels), labels)

    def test_unlabeled_ring_stays_zero(self):
        g = self.grid_row()
        labels = np.zeros((2, 10), dtype=np.int32)
        labels[0, 0] = 1
        out = backfill(g, labels)
        assert np.all(out[1] == 0)
        assert np.all(out[0] == 1)

    def test_invalid_cells_not_filled(self):
        cfg = make_config(rings=2, steps=6)
        ranges = np.array([[5.0, np.nan, 5.0, 5.0, np.nan, 5.0],
                           [np.nan] * 6])
        g = ScanGrid(config=cfg, ranges=ranges)
        labels = np.zeros((2, 6), dtype=np.int32)
        labels[0, 0] = 3
        out = backfill(g, labels)
        assert out[0, 1] == 0 and out[0, 4] == 0
        assert out[0, 2] == 3 and out[0, 3] == 3 and out[0, 5] == 3

    def test_wrap_distance(self):
        g = self.grid_row(width=8)
        labels = np.zeros((2, 8), dtype=np.int32)
        labels[0, 1] = 1
        labels[0, 6] = 2
        out = backfill(g, labels)
        assert out[0, 7] == 2  # wrap distance 1 to step 6 vs 2 to step 1
        assert out[0, 0] == 1


class TestPrune:
    def test_zero_min_size_identity(self):
        labels = np.array([[1, 1, 2], [1, 2, 2]], dtype=np.int32)
        np.testing.assert_array_equal(prune_small(labels, 0), labels)

    def test_small_absorbed_into_ring_neighbor(self):
        labels = np.zeros((2, 30), dtype=np.int32)
        labels[:, :25] = 1   # 50 cells
        labels[0, 25:28] = 2  # 3 cells
        out = prune_small(labels, 10)
        assert np.all(out[0, 25:28] == 1)
        assert set(np.unique(out)) == {0, 1}

    def test_all_below_threshold(self):
        labels = np.array([[1, 1, 2], [3, 2, 2]], dtype=np.int32)
        out = prune_small(labels, 10)
        assert np.all(out == 0)

    def test_no_donor_on_ring_goes_zero(self):
        labels = np.zeros((2, 12), dtype=np.int32)
        labels[0, :3] = 1        # too small, ring 0 has no other label
        labels[1, :] = 2         # big segment on ring 1 only
        out = prune_small(labels, 5)
        assert np.all(out[0] == 0)
        assert np.all(out[1] == 1)  # compacted 2 -> 1

    def test_compaction_preserves_order(self):
        labels = np.zeros((1, 40), dtype=np.int32)
        labels[0, :10] = 1
        labels[0, 10:12] = 2   # pruned
        labels[0, 12:25] = 3
        labels[0, 25:40] = 4
        out = prune_small(labels, 5)
        # survivors 1, 3, 4 -> compacted to 1, 2, 3 in that order
        assert out[0, 0] == 1 and out[0, 13] == 2 and out[0, 30] == 3
        assert out[0, 10] in (1, 2)  # absorbed by nearest surviving donor

    def test_config_validation(self):
        with pytest.raises(ValueError):
            SegmenterConfig(threshold_i=0.0)
        with pytest.raises(ValueError):
            SegmenterConfig(threshold_j=2.5)
        with pytest.raises(ValueError):
            SegmenterConfig(min_segment_size=-1)
