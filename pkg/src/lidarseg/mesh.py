"""Cylindrical 6-neighbor mesh over the sub-sampled scan grid.

Every valid cell at a kept azimuth step becomes a node.  A node at ring i,
kept step j initiates joins to (i+1, j), (i+1, j+) and (i, j+), where j+
is the next kept step with cylindrical wrap; the bottom ring initiates
only the horizontal join.  Together with the reverse directions this gives
each node at most six neighbors in the fixed circular slot order

    N0 = (i+1, j)    N1 = (i+1, j+)   N2 = (i, j+)
    N3 = (i-1, j)    N4 = (i-1, j-)   N5 = (i, j-)

This order is load-bearing: normal estimation pairs circularly consecutive
neighbors, so reordering slots flips normal signs.  The construction is a
single pass over the sub-sampled cells, O(n_sp).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .scan import ScanGrid, subsample_steps

# Slot displacements (dring, dpos) in kept-step positions, order N0..N5.
_SLOTS = ((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1))


@dataclass(frozen=True)
class Mesh:
    """Neighbor topology of the sub-sampled grid.

    Nodes are numbered row-major over (ring, kept-step position).  The
    ``neighbors`` array holds node ids per slot N0..N5 with -1 for absent.
    """

    rings: int
    full_steps: int
    interval: int
    kept_steps: np.ndarray     # (S,) azimuth step indices kept
    node_rings: np.ndarray     # (N,)
    node_steps: np.ndarray     # (N,) actual azimuth step index
    node_ids: np.ndarray       # (rings, S) node id or -1
    neighbors: np.ndarray      # (N, 6) node id or -1, slots N0..N5

    @property
    def n_nodes(self) -> int:
        return int(self.node_rings.size)

    @cached_property
    def degrees(self) -> np.ndarray:
        return (self.neighbors >= 0).sum(axis=1)

    def node_at(self, ring: int, step: int) -> int:
        """Node id at a (ring, azimuth step) cell, -1 if absent."""
        pos = np.searchsorted(self.kept_steps, step)
        if pos >= self.kept_steps.size or self.kept_steps[pos] != step:
            return -1
        return int(self.node_ids[ring, pos])

    def neighbor_cells(self, ring: int, step: int) -> list[tuple[int, int]]:
        """Ordered (ring, step) neighbor list of the node at a cell."""
        nid = self.node_at(ring, step)
        if nid < 0:
            raise ValueError(f"({ring}, {step}) is not a mesh node")
        out = []
        for q in self.neighbors[nid]:
            if q >= 0:
                out.append((int(self.node_rings[q]), int(self.node_steps[q])))
        return out

    def edges(self) -> np.ndarray:
        """Unique undirected edges as an (E, 2) array of node ids."""
        src = np.repeat(np.arange(self.n_nodes), 6)
        dst = self.neighbors.reshape(-1)
        ok = dst >= 0
        pairs = np.stack([src[ok], dst[ok]], axis=1)
        pairs.sort(axis=1)
        return np.unique(pairs, axis=0)


def _neighbor_grid(valid: np.ndarray, ids: np.ndarray) -> np.ndarray:
    """Per-cell neighbor ids (rings, S, 6) honoring slot order and wrap."""
    rings, S = valid.shape
    out = np.full((rings, S, 6), -1, dtype=np.int32)
    for k, (dr, dp) in enumerate(_SLOTS):
        shifted = np.roll(ids, -dp, axis=1)  # wrap over kept positions
        if dr == 1:
            out[:-1, :, k] = shifted[1:]
        elif dr == -1:
            out[1:, :, k] = shifted[:-1]
        else:
            out[:, :, k] = shifted
    out[~valid] = -1
    # With only two kept columns j+ and j- coincide; drop the repeat so
    # neighbor lists stay duplicate-free.
    if S == 2:
        for k in range(1, 6):
            dup = (out[:, :, k] >= 0) & (out[:, :, k][..., None] == out[:, :, :k]).any(axis=-1)
            out[:, :, k][dup] = -1
    return out


def build_mesh(grid: ScanGrid, interval: int, max_edge_length: float | None = None) -> Mesh:
    """Build the cylindrical mesh over every valid sub-sampled cell.

    ``max_edge_length`` optionally drops edges longer than the given meters
    in 3D (off by default; the normal weighting already down-weights long
    edges across depth discontinuities).
    """
    kept = subsample_steps(grid.config, interval)
    valid = grid.valid_mask[:, kept]
    rings, S = valid.shape
    ids = np.full((rings, S), -1, dtype=np.int32)
    n_nodes = int(valid.sum())
    ids[valid] = np.arange(n_nodes, dtype=np.int32)
    nbr_grid = _neighbor_grid(valid, ids)
    neighbors = nbr_grid[valid]
    node_rings, node_pos = np.nonzero(valid)
    node_steps = kept[node_pos]
    if max_edge_length is not None and n_nodes:
        pts = grid.points()[:, kept][valid]
        other = np.where(neighbors >= 0, neighbors, 0)
        d = np.linalg.norm(pts[other] - pts[:, None, :], axis=-1)
        neighbors = np.where((neighbors >= 0) & (d <= max_edge_length), neighbors, -1)
    return Mesh(
        rings=rings,
        full_steps=grid.steps,
        interval=int(interval),
        kept_steps=kept,
        node_rings=node_rings.astype(np.int32),
        node_steps=node_steps.astype(np.int64),
        node_ids=ids,
        neighbors=neighbors,
    )


class MeshBuilder:
    """Incremental mesh construction, one kept azimuth column at a time.

    The join rules only relate a kept column to the previous kept column,
    so meshing can run while the sensor is still spinning; this builder
    accepts columns in sweep order and finalizes the wrap back to the first
    column in :meth:`finish`.  The result is identical to :func:`build_mesh`
    on the assembled grid.
    """

    def __init__(self, grid_config, interval: int):
        self.config = grid_config
        self.interval = int(interval)
        self.kept = subsample_steps(grid_config, interval)
        self._columns: list[np.ndarray] = []

    def add_column(self, ranges: np.ndarray) -> None:
        """Feed the range column for the next kept azimuth step."""
        col = np.asarray(ranges, dtype=float).reshape(-1)
        if col.size != self.config.rings:
            raise ValueError(f"column length {col.size} != ring count {self.config.rings}")
        if len(self._columns) >= self.kept.size:
            raise ValueError("all kept columns already supplied")
        self._columns.append(col)

    def finish(self) -> Mesh:
        if len(self._columns) != self.kept.size:
            raise ValueError(f"expected {self.kept.size} kept columns, got {len(self._columns)}")
        full = np.full((self.config.rings, self.config.azimuth_steps), np.nan)
        full[:, self.kept] = np.stack(self._columns, axis=1)
        grid = ScanGrid(config=self.config, ranges=full)
        return build_mesh(grid, self.interval)


def mesh_triangles(mesh: Mesh) -> np.ndarray:
    """Triangle faces as an (F, 3) array of node ids, for PLY export.

    A quad cell splits into (p, down, diag) and (p, diag, right); a
    triangle is emitted when all three of its edges exist.
    """
    ids = mesh.node_ids
    down = np.full_like(ids, -1)
    down[:-1] = ids[1:]
    diag = np.roll(down, -1, axis=1)
    right = np.roll(ids, -1, axis=1)
    tris = []
    for corners in ((ids, down, diag), (ids, diag, right)):
        a, b, c = (x.reshape(-1) for x in corners)
        ok = (a >= 0) & (b >= 0) & (c >= 0)
        tris.append(np.stack([a[ok], b[ok], c[ok]], axis=1))
    return np.concatenate(tris, axis=0)
