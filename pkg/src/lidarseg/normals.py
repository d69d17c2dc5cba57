"""Per-node surface normals from weighted averaged cross products.

For a node p, vectors run from p to each existing neighbor in the circular
slot order N0..N5.  Every circularly consecutive pair (Va, Vb) of existing
vectors contributes the cross product Va x Vb with weight 1/(|Va| + |Vb|),
so pairs that reach far across a depth discontinuity count less.  The
weighted component-wise mean is renormalized to unit length and oriented
toward the sensor.  A node needs at least 2 neighbors to get a normal;
with exactly 2 only the single pair (in slot order) is formed, with 3 or
more the last pair wraps back to the first vector to complete the circle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh
from .scan import GridIndex, ScanGrid

_MIN_ACCUM = 1e-12


@dataclass(frozen=True)
class NormalMap:
    """Unit normal per mesh node; NaN rows where no normal exists."""

    values: np.ndarray  # (N, 3)
    mask: np.ndarray    # (N,) True where a normal is present

    @property
    def n_nodes(self) -> int:
        return int(self.mask.size)

    def normal(self, node_id: int) -> np.ndarray | None:
        if not self.mask[node_id]:
            return None
        return self.values[node_id]


def node_positions(grid: ScanGrid, mesh: Mesh) -> np.ndarray:
    """Cartesian position of every mesh node, shape (N, 3)."""
    dirs = grid.config.ray_directions()[:, mesh.kept_steps]
    pts = dirs * grid.ranges[:, mesh.kept_steps, None]
    return pts[mesh.node_ids >= 0]


def normal_from_neighbors(position, neighbor_positions) -> np.ndarray | None:
    """Weighted cross-product normal for one node given its ordered
    neighbor positions; None with fewer than 2 neighbors or degenerate
    geometry.  Reference scalar implementation of the estimator."""
    position = np.asarray(position, dtype=float)
    nbrs = [np.asarray(q, dtype=float) for q in neighbor_positions]
    if len(nbrs) < 2:
        return None
    vectors = [q - position for q in nbrs]
    if len(vectors) == 2:
        pairs = [(0, 1)]
    else:
        pairs = [(k, (k + 1) % len(vectors)) for k in range(len(vectors))]
    acc = np.zeros(3)
    wsum = 0.0
    for a, b in pairs:
        va, vb = vectors[a], vectors[b]
        length = float(np.linalg.norm(va) + np.linalg.norm(vb))
        if length <= 0.0:
            continue
        w = 1.0 / length
        acc += w * np.cross(va, vb)
        wsum += w
    if wsum <= 0.0:
        return None
    mean = acc / wsum
    mag = float(np.linalg.norm(mean))
    if mag < _MIN_ACCUM:
        return None
    n = mean / mag
    if float(n @ position) > 0.0:
        n = -n
    return n


def point_normal(grid: ScanGrid, mesh: Mesh, node: GridIndex) -> np.ndarray | None:
    """Normal of the mesh node at grid cell ``node`` (None when absent)."""
    nid = mesh.node_at(int(node[0]), int(node[1]))
    if nid < 0:
        raise ValueError(f"({node[0]}, {node[1]}) is not a mesh node")
    pos = node_positions(grid, mesh)
    nbr = mesh.neighbors[nid]
    return normal_from_neighbors(pos[nid], [pos[q] for q in nbr if q >= 0])


def estimate_normals(grid: ScanGrid, mesh: Mesh) -> NormalMap:
    """Vectorized normal estimation for every mesh node."""
    n = mesh.n_nodes
    if n == 0:
        return NormalMap(values=np.zeros((0, 3)), mask=np.zeros(0, dtype=bool))
    pos = node_positions(grid, mesh)
    nbrs = mesh.neighbors
    exists = nbrs >= 0
    counts = exists.sum(axis=1)

    # Entries enumerate existing (node, slot) pairs row-major, i.e. per node
    # in slot order; the circular successor of the last entry of a node is
    # its first entry.
    node_of, slot_of = np.nonzero(exists)
    n_entries = node_of.size
    entry_ids = np.arange(n_entries)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    pos_in_node = entry_ids - offsets[node_of]
    is_last = pos_in_node == counts[node_of] - 1
    succ = np.where(is_last, offsets[node_of], entry_ids + 1)

    # A node with c >= 3 neighbors forms c pairs around the circle; with
    # exactly 2 only the single pair in slot order.
    c_here = counts[node_of]
    keep = (c_here >= 3) | ((c_here == 2) & (pos_in_node == 0))
    first = entry_ids[keep]
    second = succ[keep]
    pair_node = node_of[first]

    nbr_pos = pos[nbrs[node_of, slot_of]]
    va = nbr_pos[first] - pos[pair_node]
    vb = nbr_pos[second] - pos[pair_node]
    cross = np.cross(va, vb)
    lengths = np.linalg.norm(va, axis=1) + np.linalg.norm(vb, axis=1)
    with np.errstate(divide="ignore"):
        w = np.where(lengths > 0.0, 1.0 / lengths, 0.0)

    wsum = np.bincount(pair_node, weights=w, minlength=n)
    acc = np.empty((n, 3))
    for k in range(3):
        acc[:, k] = np.bincount(pair_node, weights=w * cross[:, k], minlength=n)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = acc / wsum[:, None]
    mag = np.linalg.norm(mean, axis=1)
    mask = (counts >= 2) & (wsum > 0.0) & (mag >= _MIN_ACCUM)
    values = np.full((n, 3), np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = mean / mag[:, None]
    flip = np.einsum("ij,ij->i", np.nan_to_num(unit), pos) > 0.0
    unit[flip] *= -1.0
    values[mask] = unit[mask]
    return NormalMap(values=values, mask=mask)


def normals_to_grid(mesh: Mesh, normals: NormalMap) -> np.ndarray:
    """Scatter node normals onto the full-resolution grid (NaN elsewhere)."""
    out = np.full((mesh.rings, mesh.full_steps, 3), np.nan)
    ok = normals.mask
    out[mesh.node_rings[ok], mesh.node_steps[ok]] = normals.values[ok]
    return out
