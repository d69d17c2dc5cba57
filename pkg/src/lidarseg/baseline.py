"""Classical region-growing segmentation baseline on unorganized points.

k-nearest-neighbor graph, per-point PCA normals and curvature, then region
growth from the unvisited point of lowest curvature: a neighbor joins the
region when its normal is within ``angle_threshold`` of the region seed's
normal, and keeps growing the frontier when its own curvature is below
``curvature_threshold``.  Mirrors the usual point-cloud-library defaults;
it exists as the accuracy/speed comparison partner, not as a faithful
reimplementation of any particular library version.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree


@dataclass(frozen=True)
class BaselineConfig:
    k_neighbors: int = 30
    angle_threshold: float = np.radians(3.0)
    curvature_threshold: float = 0.05
    min_cluster_size: int = 50

    def __post_init__(self):
        if self.k_neighbors < 3:
            raise ValueError("k_neighbors must be >= 3")
        if not (0.0 < self.angle_threshold < np.pi / 2):
            raise ValueError("angle_threshold must be in (0, pi/2) radians")
        if self.min_cluster_size < 0:
            raise ValueError("min_cluster_size must be >= 0")


def pca_normals(points: np.ndarray, neighbor_idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Normal (smallest principal axis) and curvature lam_min / sum(lam)
    for each point's neighborhood given by ``neighbor_idx`` (P, k)."""
    hoods = points[neighbor_idx]                    # (P, k, 3)
    centered = hoods - hoods.mean(axis=1, keepdims=True)
    cov = np.einsum("pki,pkj->pij", centered, centered) / neighbor_idx.shape[1]
    eigvals, eigvecs = np.linalg.eigh(cov)          # ascending eigenvalues
    normals = eigvecs[:, :, 0]
    total = eigvals.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        curvature = np.where(total > 0.0, eigvals[:, 0] / total, 0.0)
    return normals, curvature


def baseline_segment(points: np.ndarray, cfg: BaselineConfig) -> np.ndarray:
    """Per-point labels, 1..k in region discovery order; 0 marks points in
    clusters smaller than ``min_cluster_size``.  Deterministic for a fixed
    input ordering."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    n = points.shape[0]
    if n < cfg.k_neighbors + 1:
        raise ValueError(f"need at least k_neighbors+1 = {cfg.k_neighbors + 1} points, got {n}")
    tree = cKDTree(points)
    _, idx = tree.query(points, k=cfg.k_neighbors + 1)
    normals, curvature = pca_normals(points, idx)
    graph = idx[:, 1:]  # drop self

    cos_limit = float(np.cos(cfg.angle_threshold))
    order = np.argsort(curvature, kind="stable")
    labels = np.zeros(n, dtype=np.int32)
    visited = np.zeros(n, dtype=bool)
    graph_list = graph.tolist()
    curv_list = curvature.tolist()
    region = 0
    region_sizes = []
    for seed in order:
        if visited[seed]:
            continue
        region += 1
        seed_normal = normals[seed]
        visited[seed] = True
        labels[seed] = region
        size = 1
        frontier = deque([int(seed)])
        while frontier:
            p = frontier.popleft()
            for q in graph_list[p]:
                if visited[q]:
                    continue
                # Unoriented normals: compare by |cos|.
                if abs(float(normals[q] @ seed_normal)) < cos_limit:
                    continue
                visited[q] = True
                labels[q] = region
                size += 1
                if curv_list[q] < cfg.curvature_threshold:
                    frontier.append(q)
        region_sizes.append(size)

    sizes = np.asarray([0] + region_sizes)
    keep = sizes >= cfg.min_cluster_size
    keep[0] = False
    remap = np.zeros(sizes.size, dtype=np.int32)
    remap[keep] = np.arange(1, int(keep.sum()) + 1, dtype=np.int32)
    return remap[labels]
