"""Symmetry-plane detection for meshes and point clouds.

The scan enumerates candidate planes through the origin of the normalized
shape, gates them by how well the reflected sample matches the original
(Chamfer), refines survivors with reflective ICP, merges near-duplicates and
maps the result back to the input frame.  The same routine doubles as an
automatic ground-truth generator for symmetry datasets and as a
shape-to-symmetry baseline when applied to generated geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cloud import (
    NearestNeighborIndex,
    SimilarityTransform,
    TriMesh,
    as_cloud,
    chamfer,
    normalize_to_unit_sphere,
    reflect_cloud,
    sample_surface,
    surface_distance,
)
from .geometry import SymmetryPlane, geodesic_deg, sample_hemisphere
from .registration import IcpConfig, refine_plane

# Refined candidates are discarded before full verification when their quick
# misfit exceeds this multiple of the gate; full Chamfer decides the rest.
_PROXY_SLACK = 1.5
# Fraction of candidates that must pass the gate before the shape is flagged
# as symmetric about essentially every candidate plane (spheres).
_UBIQUITY_FRACTION = 0.8


@dataclass(frozen=True)
class DetectorConfig:
    """Detection parameters.

    ``chamfer_gate`` is in unit-sphere-normalized length units.  Candidates
    are pre-filtered at ``prefilter_factor`` times the best candidate misfit
    (never below the gate) so that refinement is only spent where a symmetry
    basin may exist; the final keep decision is always the full symmetric
    Chamfer against ``chamfer_gate``.
    """

    n_points: int = 50000
    n_candidates: int = 31
    chamfer_gate: float = 0.02
    merge_threshold_deg: float = 10.0
    icp: IcpConfig = field(default_factory=IcpConfig)
    prefilter_points: int = 10000
    prefilter_factor: float = 6.0
    icp_sample_size: int = 2000

    def __post_init__(self):
        if self.n_points < 100:
            raise ValueError("n_points must be >= 100")
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")
        if self.chamfer_gate <= 0:
            raise ValueError("chamfer_gate must be positive")
        if not 0.0 < self.merge_threshold_deg < 90.0:
            raise ValueError("merge_threshold_deg must lie in (0, 90)")


@dataclass(frozen=True)
class DetectedPlane:
    """A kept plane with its residual (input-normalized units) and score in (0, 1]."""

    plane: SymmetryPlane
    residual: float
    score: float


@dataclass(frozen=True)
class DetectedPlaneSet:
    """Detected planes sorted by ascending residual.

    ``ubiquitous`` marks shapes (spheres) where most candidate planes already
    pass the gate, so the enumeration is not meaningful as a finite plane set.
    """

    planes: list[DetectedPlane]
    ubiquitous: bool = False

    def __len__(self) -> int:
        return len(self.planes)

    def normals(self) -> np.ndarray:
        return np.array([p.plane.normal for p in self.planes]).reshape(-1, 3)


def _strided(points, limit):
    if limit is None or len(points) <= limit:
        return points
    return points[:: int(math.ceil(len(points) / limit))]


def _scan(cloud, cfg: DetectorConfig, sim: SimilarityTransform, mesh: TriMesh | None) -> DetectedPlaneSet:
    """Shared candidate scan over a normalized cloud.

    ``mesh`` (already normalized) switches residual reporting to mean
    point-to-surface distance, which is free of the sample-to-sample Chamfer
    noise floor; gating always uses the cloud Chamfer.
    """
    index = NearestNeighborIndex(cloud)
    quick_sub = _strided(cloud, cfg.prefilter_points)

    def quick_misfit(plane: SymmetryPlane) -> float:
        return float(index.query(reflect_cloud(quick_sub, plane))[0].mean())

    candidates = [SymmetryPlane(n, 0.0) for n in sample_hemisphere(cfg.n_candidates)]
    misfits = np.array([quick_misfit(p) for p in candidates])
    ubiquitous = float((misfits <= cfg.chamfer_gate).mean()) > _UBIQUITY_FRACTION

    cutoff = max(cfg.chamfer_gate, cfg.prefilter_factor * float(misfits.min()))
    admitted = [i for i in np.argsort(misfits, kind="stable") if misfits[i] <= cutoff]

    refined = []
    for i in admitted:
        result = refine_plane(
            cloud,
            candidates[i],
            cfg.icp,
            icp_sample_limit=cfg.icp_sample_size,
            target_index=index,
            residual_fn=quick_misfit,
        )
        if result.residual <= _PROXY_SLACK * cfg.chamfer_gate:
            refined.append(result)

    # greedy merge, best proxy residual absorbs neighbors within the threshold
    refined.sort(key=lambda r: r.residual)
    survivors = []
    for r in refined:
        if all(
            geodesic_deg(r.plane.normal, s.plane.normal) >= cfg.merge_threshold_deg
            for s in survivors
        ):
            survivors.append(r)

    planes = []
    inverse = sim.inverse()
    for s in survivors:
        full = chamfer(cloud, reflect_cloud(cloud, s.plane))
        if full > cfg.chamfer_gate:
            continue
        if mesh is not None:
            residual = float(surface_distance(reflect_cloud(cloud, s.plane), mesh).mean())
        else:
            residual = full
        score = math.exp(-residual / cfg.chamfer_gate)
        planes.append(DetectedPlane(inverse.apply_plane(s.plane), residual, score))

    planes.sort(key=lambda p: p.residual)
    return DetectedPlaneSet(planes, ubiquitous)


def detect_planes(mesh: TriMesh, cfg: DetectorConfig = DetectorConfig(), seed: int = 0) -> DetectedPlaneSet:
    """Detect reflection-symmetry planes of a triangle mesh.

    The mesh is normalized to a unit bounding sphere, sampled with
    ``cfg.n_points`` seeded surface points, scanned over ``cfg.n_candidates``
    hemisphere normals and the found planes are returned in the original mesh
    frame.  Residuals and the gate stay in normalized units.  The result is
    bitwise deterministic for identical (mesh, cfg, seed).
    """
    normalized, sim = normalize_to_unit_sphere(mesh)
    cloud = sample_surface(normalized, cfg.n_points, seed)
    return _scan(cloud, cfg, sim, normalized)


def detect_planes_from_cloud(points, cfg: DetectorConfig = DetectorConfig()) -> DetectedPlaneSet:
    """Detect reflection-symmetry planes of a raw point cloud.

    The cloud is centered on its centroid and scaled so the farthest point
    sits at radius 1 before scanning; no resampling happens, so the input
    density is what gates the Chamfer.  Residuals are reported as symmetric
    cloud Chamfer (a mesh surface is not available here).
    """
    pts = as_cloud(points)
    from .registration import _check_not_degenerate

    _check_not_degenerate(pts, "cloud")
    centroid = pts.mean(axis=0)
    radius = float(np.sqrt(((pts - centroid) ** 2).sum(axis=1).max()))
    sim = SimilarityTransform(1.0 / radius, np.eye(3), -centroid / radius)
    return _scan(sim.apply(pts), cfg, sim, None)
