"""Fast geometric surface segmentation for spinning-Lidar range grids.

Pipeline: organized scan grid -> cylindrical 6-neighbor mesh (with azimuth
sub-sampling) -> weighted cross-product surface normals -> depth-first
flood fill on normal homogeneity -> per-ring label backfill.  Ships with a
ray-cast scene simulator, a classical region-growing baseline, and an
edge-based precision/recall evaluator.
"""

from .baseline import BaselineConfig, baseline_segment, pca_normals
from .evaluate import (
    EvalConfig,
    EvalReport,
    StageStats,
    bench,
    dilate_chebyshev,
    edge_prf,
    extract_edges,
    time_total,
)
from .mesh import Mesh, MeshBuilder, build_mesh, mesh_triangles
from .normals import NormalMap, estimate_normals, node_positions, normal_from_neighbors, point_normal
from .pipeline import PipelineConfig, PipelineResult, run_pipeline
from .scan import (
    INVALID,
    GridIndex,
    Point3,
    ScanGrid,
    SensorConfig,
    polar_to_cartesian,
    subsample_steps,
    valid_point,
)
from .scenes import generate_scene, generate_suite
from .segment import SegmenterConfig, backfill, prune_small, segment
from .simulate import (
    Box,
    Cone,
    Cylinder,
    Plane,
    Primitive,
    Scene,
    Sphere,
    cast_grid,
    ray_intersect,
    rotation_rpy,
    scan_scene,
    scene_normals,
)

__version__ = "0.1.0"
