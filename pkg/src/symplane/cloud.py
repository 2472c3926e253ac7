"""Point clouds, triangle meshes, normalization, sampling and Chamfer distance.

A point cloud is a plain float64 ndarray of shape (n, 3).  Meshes carry
vertex and face arrays.  Nearest-neighbor search is exact (scipy cKDTree).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateBoundingSphere, EmptyCloud, EmptyMesh, NoArea
from .geometry import SymmetryPlane, reflect_points


def as_cloud(points) -> np.ndarray:
    """Validate and convert to a float64 (n, 3) array."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) point array, got shape {pts.shape}")
    if pts.shape[0] == 0:
        raise EmptyCloud("point cloud is empty")
    if not np.isfinite(pts).all():
        raise ValueError("point cloud contains non-finite coordinates")
    return pts


@dataclass(frozen=True)
class TriMesh:
    """Triangle mesh: (v, 3) float vertices and (f, 3) integer face indices."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        f = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if len(v) and len(f):
            if f.min() < 0 or f.max() >= len(v):
                raise ValueError("face index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)

    def triangles(self) -> np.ndarray:
        """Face corner positions, shape (f, 3, 3)."""
        return self.vertices[self.faces]

    def face_areas(self) -> np.ndarray:
        tri = self.triangles()
        cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return 0.5 * np.linalg.norm(cross, axis=1)


@dataclass(frozen=True)
class SimilarityTransform:
    """Similarity map ``x -> scale * R x + t`` (rigid transform plus scale)."""

    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return self.scale * (pts @ np.asarray(self.rotation).T) + self.translation

    def inverse(self) -> "SimilarityTransform":
        r = np.asarray(self.rotation)
        return SimilarityTransform(1.0 / self.scale, r.T, -(r.T @ self.translation) / self.scale)

    def apply_plane(self, plane: SymmetryPlane) -> SymmetryPlane:
        """Map a plane given in the source frame into the target frame."""
        n = np.asarray(self.rotation) @ plane.normal
        d = self.scale * plane.offset - float(n @ self.translation)
        return SymmetryPlane(n, d)


def bounding_sphere(points) -> tuple[np.ndarray, float]:
    """Ritter's approximate bounding sphere, tightened by one max-distance pass.

    Not the minimal enclosing sphere; it only needs to fix the normalization
    convention deterministically.
    """
    pts = as_cloud(points)
    p0 = pts[0]
    p1 = pts[np.argmax(((pts - p0) ** 2).sum(axis=1))]
    p2 = pts[np.argmax(((pts - p1) ** 2).sum(axis=1))]
    center = 0.5 * (p1 + p2)
    radius = 0.5 * float(np.linalg.norm(p2 - p1))
    for p in pts:
        d = float(np.linalg.norm(p - center))
        if d > radius:
            radius = 0.5 * (radius + d)
            center = p + (center - p) * (radius / d)
    radius = float(np.sqrt(((pts - center) ** 2).sum(axis=1).max()))
    return center, radius


def normalize_to_unit_sphere(mesh: TriMesh) -> tuple[TriMesh, SimilarityTransform]:
    """Center the mesh on its bounding-sphere center and scale the sphere to radius 1.

    Returns the normalized mesh and the applied similarity (input frame ->
    normalized frame) so results can be mapped back.
    """
    if len(mesh.vertices) == 0:
        raise EmptyMesh("mesh has no vertices")
    center, radius = bounding_sphere(mesh.vertices)
    if radius < 1e-12:
        raise DegenerateBoundingSphere("all mesh vertices coincide")
    sim = SimilarityTransform(1.0 / radius, np.eye(3), -center / radius)
    return TriMesh(sim.apply(mesh.vertices), mesh.faces), sim


def sample_surface(mesh: TriMesh, n: int, seed: int) -> np.ndarray:
    """Draw n points on the mesh surface, area-weighted, uniform within faces.

    Deterministic for a given seed (PCG64 stream).  Zero-area faces carry zero
    weight; raises NoArea when every face is degenerate.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if len(mesh.faces) == 0:
        raise NoArea("mesh has no faces")
    areas = mesh.face_areas()
    total = areas.sum()
    if total <= 0.0:
        raise NoArea("all faces are degenerate")
    rng = np.random.default_rng(seed)
    cum = np.cumsum(areas)
    face_idx = np.searchsorted(cum, rng.random(n) * total)
    face_idx = np.minimum(face_idx, len(areas) - 1)
    tri = mesh.triangles()[face_idx]
    # sqrt trick gives the uniform density on each triangle
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    bary = np.column_stack([1.0 - r1, r1 * (1.0 - r2), r1 * r2])
    return (tri * bary[:, :, None]).sum(axis=1)


class NearestNeighborIndex:
    """Exact nearest-neighbor search over a fixed cloud (kd-tree backed).

    Safe for concurrent queries once built.
    """

    def __init__(self, points):
        self.points = as_cloud(points)
        self._tree = cKDTree(self.points)

    def query(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Distances and indices of the nearest indexed point for each query."""
        d, i = self._tree.query(np.asarray(points, dtype=float), workers=1)
        return d, i

    def __len__(self) -> int:
        return len(self.points)


def chamfer(a, b) -> float:
    """Symmetric mean unsquared nearest-neighbor distance between two clouds.

    ``0.5 * (mean_a dist(a, b) + mean_b dist(b, a))``.
    """
    a = as_cloud(a)
    b = as_cloud(b)
    d_ab = cKDTree(b).query(a, workers=1)[0]
    d_ba = cKDTree(a).query(b, workers=1)[0]
    return 0.5 * (float(d_ab.mean()) + float(d_ba.mean()))


def reflect_cloud(points, plane: SymmetryPlane) -> np.ndarray:
    """Reflect every point across the plane, preserving order."""
    return reflect_points(plane, as_cloud(points))


# ---------------------------------------------------------------------------
# Point-to-surface distance (used for mesh-backed residual reporting).


def _point_triangle_distance(p, a, b, c) -> np.ndarray:
    """Distance from points p[i] to triangles (a[i], b[i], c[i]), elementwise.

    Region classification after Ericson's closest-point-on-triangle test.
    """
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = np.einsum("ij,ij->i", ab, ap)
    d2 = np.einsum("ij,ij->i", ac, ap)
    bp = p - b
    d3 = np.einsum("ij,ij->i", ab, bp)
    d4 = np.einsum("ij,ij->i", ac, bp)
    cp = p - c
    d5 = np.einsum("ij,ij->i", ab, cp)
    d6 = np.einsum("ij,ij->i", ac, cp)
    va = d3 * d6 - d5 * d4
    vb = d5 * d2 - d1 * d6
    vc = d1 * d4 - d3 * d2

    out = np.empty(len(p))
    done = np.zeros(len(p), dtype=bool)

    m = (d1 <= 0) & (d2 <= 0)
    out[m] = np.linalg.norm(ap[m], axis=1)
    done |= m
    m = ~done & (d3 >= 0) & (d4 <= d3)
    out[m] = np.linalg.norm(bp[m], axis=1)
    done |= m
    m = ~done & (d6 >= 0) & (d5 <= d6)
    out[m] = np.linalg.norm(cp[m], axis=1)
    done |= m

    m = ~done & (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    t = (d1[m] / (d1[m] - d3[m]))[:, None]
    out[m] = np.linalg.norm(ap[m] - t * ab[m], axis=1)
    done |= m
    m = ~done & (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    t = (d2[m] / (d2[m] - d6[m]))[:, None]
    out[m] = np.linalg.norm(ap[m] - t * ac[m], axis=1)
    done |= m
    m = ~done & (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
    t = ((d4[m] - d3[m]) / ((d4[m] - d3[m]) + (d5[m] - d6[m])))[:, None]
    out[m] = np.linalg.norm(bp[m] - t * (c[m] - b[m]), axis=1)
    done |= m

    m = ~done
    nrm = np.cross(ab[m], ac[m])
    nlen = np.linalg.norm(nrm, axis=1)
    nlen[nlen == 0] = 1.0
    out[m] = np.abs(np.einsum("ij,ij->i", ap[m], nrm)) / nlen
    return out


def surface_distance(points, mesh: TriMesh, candidate_faces: int = 16) -> np.ndarray:
    """Distance from each point to the mesh surface.

    Exact when the mesh has at most ``candidate_faces`` faces; for larger
    meshes each point is tested against the faces with the nearest centroids,
    which yields a tight upper bound on the true distance.
    """
    pts = as_cloud(points)
    tri = mesh.triangles()
    n_faces = len(tri)
    if n_faces == 0:
        raise NoArea("mesh has no faces")
    if n_faces <= candidate_faces:
        best = np.full(len(pts), np.inf)
        for f in range(n_faces):
            a = np.broadcast_to(tri[f, 0], pts.shape)
            b = np.broadcast_to(tri[f, 1], pts.shape)
            c = np.broadcast_to(tri[f, 2], pts.shape)
            best = np.minimum(best, _point_triangle_distance(pts, a, b, c))
        return best
    centroids = tri.mean(axis=1)
    k = min(candidate_faces, n_faces)
    _, face_ids = cKDTree(centroids).query(pts, k=k, workers=1)
    best = np.full(len(pts), np.inf)
    for j in range(k):
        fj = face_ids[:, j]
        best = np.minimum(
            best, _point_triangle_distance(pts, tri[fj, 0], tri[fj, 1], tri[fj, 2])
        )
    return best
