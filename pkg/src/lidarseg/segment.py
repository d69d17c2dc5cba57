"""Flood-fill surface segmentation over the mesh, plus label completion.

Segmentation walks the mesh depth-first: nodes are visited in row-major
order, each unlabeled node with a normal seeds a fresh label, and the
label propagates to neighbors whose normal differs by strictly less than
the per-component thresholds.  Sub-sampled / normal-less cells are then
backfilled from the nearest labeled cell along their ring, and segments
with too few points can be dissolved into their ring neighbors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh
from .normals import NormalMap
from .scan import ScanGrid


@dataclass(frozen=True)
class SegmenterConfig:
    """Component-difference thresholds and the pruning floor."""

    threshold_i: float = 0.2
    threshold_j: float = 0.2
    threshold_k: float = 0.2
    min_segment_size: int = 10

    def __post_init__(self):
        for t in (self.threshold_i, self.threshold_j, self.threshold_k):
            if not (0.0 < t <= 2.0):
                raise ValueError("thresholds must be in (0, 2]")
        if self.min_segment_size < 0:
            raise ValueError("min_segment_size must be >= 0")

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([self.threshold_i, self.threshold_j, self.threshold_k])


def segment(mesh: Mesh, normals: NormalMap, cfg: SegmenterConfig) -> np.ndarray:
    """Label mesh nodes by depth-first flood fill on normal homogeneity.

    Returns the dense full-resolution label grid (rings, full_steps) with
    labels 1..k at node cells in first-touch order and 0 elsewhere.
    Deterministic: seeds are taken in row-major node order and neighbors
    expanded in slot order.
    """
    n = mesh.n_nodes
    labels = np.zeros(n, dtype=np.int32)
    if n:
        # Pre-evaluate the threshold test per directed mesh edge; the DFS
        # below then only touches plain Python lists.
        nbrs = mesh.neighbors
        safe = np.where(nbrs >= 0, nbrs, 0)
        exists = (nbrs >= 0) & normals.mask[safe]
        diff = np.abs(normals.values[safe] - normals.values[:, None, :])
        with np.errstate(invalid="ignore"):
            passes = exists & normals.mask[:, None] & np.all(diff < cfg.thresholds, axis=-1)

        nbr_list = nbrs.tolist()
        pass_list = passes.tolist()
        has_normal = normals.mask.tolist()
        lab = labels.tolist()
        label = 0
        stack = []
        for seed in range(n):
            if lab[seed] != 0 or not has_normal[seed]:
                continue
            label += 1
            lab[seed] = label
            stack.append(seed)
            while stack:
                p = stack.pop()
                row = nbr_list[p]
                ok = pass_list[p]
                for k in range(6):
                    q = row[k]
                    if q >= 0 and lab[q] == 0 and ok[k]:
                        lab[q] = label
                        stack.append(q)
        labels = np.asarray(lab, dtype=np.int32)

    dense = np.zeros((mesh.rings, mesh.full_steps), dtype=np.int32)
    dense[mesh.node_rings, mesh.node_steps] = labels
    return dense


def _nearest_donor_steps(donors: np.ndarray, targets: np.ndarray, width: int) -> np.ndarray:
    """Nearest donor step per target under cyclic step distance.

    ``donors`` must be sorted ascending.  Ties pick the donor with the
    smaller actual step index.
    """
    ext = np.concatenate([donors - width, donors, donors + width])
    pos = np.searchsorted(ext, targets)
    left = ext[pos - 1]
    right = ext[pos]
    d_left = targets - left
    d_right = right - targets
    left_step = left % width
    right_step = right % width
    tie = np.minimum(left_step, right_step)
    return np.where(d_left < d_right, left_step, np.where(d_right < d_left, right_step, tie))


def backfill(grid: ScanGrid, labels: np.ndarray) -> np.ndarray:
    """Assign every valid unlabeled cell the label of the nearest labeled
    cell on the same ring (azimuth distance, cylindrical wrap; ties toward
    the smaller step index).  Rings without any labeled cell stay 0."""
    out = labels.copy()
    valid = grid.valid_mask
    width = labels.shape[1]
    for i in range(labels.shape[0]):
        row = labels[i]
        donors = np.nonzero(row > 0)[0]
        targets = np.nonzero(valid[i] & (row == 0))[0]
        if donors.size == 0 or targets.size == 0:
            continue
        donor_steps = _nearest_donor_steps(donors, targets, width)
        out[i, targets] = row[donor_steps]
    return out


def prune_small(labels: np.ndarray, min_segment_size: int) -> np.ndarray:
    """Dissolve segments with fewer than ``min_segment_size`` cells.

    Dissolved cells take the nearest surviving label on their ring (same
    rule as backfill), or 0 when the ring has no surviving donor.  The
    remaining labels are compacted to 1..k preserving first-touch order.
    """
    if min_segment_size <= 0:
        return labels.copy()
    counts = np.bincount(labels.reshape(-1))
    small = np.zeros(counts.size, dtype=bool)
    small[1:] = counts[1:] < min_segment_size
    if counts.size <= 1 or not small.any():
        return labels.copy()
    out = labels.copy()
    dissolved_mask = small[labels]
    width = labels.shape[1]
    for i in range(labels.shape[0]):
        targets = np.nonzero(dissolved_mask[i])[0]
        if targets.size == 0:
            continue
        row = labels[i]
        donors = np.nonzero((row > 0) & ~dissolved_mask[i])[0]
        if donors.size == 0:
            out[i, targets] = 0
            continue
        donor_steps = _nearest_donor_steps(donors, targets, width)
        out[i, targets] = row[donor_steps]
    # Compact surviving ids to 1..k in first-touch (ascending old id) order.
    survivors = np.unique(out)
    survivors = survivors[survivors > 0]
    remap = np.zeros(counts.size, dtype=np.int32)
    remap[survivors] = np.arange(1, survivors.size + 1, dtype=np.int32)
    return remap[out]
