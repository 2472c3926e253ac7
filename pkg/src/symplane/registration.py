"""Rigid ICP and refinement of a symmetry plane from reflective correspondences."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cloud import NearestNeighborIndex, as_cloud, chamfer, reflect_cloud
from .errors import DegenerateCloud
from .geometry import RigidTransform, SymmetryPlane, canonical_normal, geodesic_deg


@dataclass(frozen=True)
class IcpConfig:
    """Knobs for point-to-point ICP.

    ``convergence_eps`` bounds the change of the RMS correspondence distance
    between iterations; ``trim_fraction`` drops that fraction of the worst
    pairs before each alignment step.
    """

    max_iterations: int = 50
    convergence_eps: float = 1e-6
    trim_fraction: float = 0.0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.convergence_eps <= 0:
            raise ValueError("convergence_eps must be positive")
        if not 0.0 <= self.trim_fraction < 1.0:
            raise ValueError("trim_fraction must lie in [0, 1)")


@dataclass(frozen=True)
class IcpResult:
    transform: RigidTransform
    final_mean_distance: float
    iterations_used: int
    converged: bool


@dataclass(frozen=True)
class PlaneRefinement:
    """Outcome of refine_plane.

    ``refined`` is False when no refinement round improved on the initial
    plane (the divergence guard), in which case ``plane`` is the initial one.
    """

    plane: SymmetryPlane
    residual: float
    rounds: int
    refined: bool


def _check_not_degenerate(points, name: str):
    pts = np.asarray(points, dtype=float)
    if len(pts) < 3:
        raise DegenerateCloud(f"{name} needs at least 3 points")
    centered = pts - pts.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    if s[1] <= 1e-9 * max(s[0], 1e-30):
        raise DegenerateCloud(f"{name} is collinear or coincident")


def _kabsch(src, dst):
    """Least-squares proper rotation + translation taking src onto dst."""
    cs = src.mean(axis=0)
    cd = dst.mean(axis=0)
    h = (src - cs).T @ (dst - cd)
    u, s, vt = np.linalg.svd(h)
    if s[1] <= 1e-12 * max(s[0], 1e-30):
        raise DegenerateCloud("correspondences are rank deficient")
    d = np.eye(3)
    if np.linalg.det(u @ vt) < 0:
        d[2, 2] = -1.0
    r = vt.T @ d @ u.T
    return r, cd - r @ cs


def icp_register(
    source,
    target,
    cfg: IcpConfig = IcpConfig(),
    target_index: NearestNeighborIndex | None = None,
) -> IcpResult:
    """Rigid point-to-point ICP aligning source onto target.

    Alternates nearest-neighbor correspondence with a Kabsch/SVD fit.  The RMS
    correspondence distance is checked to be non-increasing every iteration;
    convergence is declared when its change drops below ``convergence_eps``.
    """
    src = as_cloud(source)
    tgt = as_cloud(target)
    _check_not_degenerate(src, "source cloud")
    _check_not_degenerate(tgt, "target cloud")
    index = target_index if target_index is not None else NearestNeighborIndex(tgt)

    transform = RigidTransform.identity()
    current = src.copy()
    keep = max(3, int(math.ceil(len(src) * (1.0 - cfg.trim_fraction))))
    prev_rms = math.inf
    mean_dist = math.inf
    converged = False
    iterations = 0

    for iterations in range(1, cfg.max_iterations + 1):
        dist, idx = index.query(current)
        if cfg.trim_fraction > 0.0:
            order = np.argsort(dist, kind="stable")[:keep]
        else:
            order = slice(None)
        pair_dist = dist[order]
        rms = float(np.sqrt((pair_dist**2).mean()))
        mean_dist = float(pair_dist.mean())
        if rms > prev_rms * (1.0 + 1e-9) + 1e-15:
            raise RuntimeError(
                f"ICP objective increased ({prev_rms:.3e} -> {rms:.3e}); "
                "this indicates a correspondence or alignment bug"
            )
        if rms < cfg.convergence_eps or prev_rms - rms < cfg.convergence_eps:
            converged = True
            break
        prev_rms = rms
        r, t = _kabsch(current[order], index.points[idx[order]])
        current = current @ r.T + t
        transform = RigidTransform(r, t).compose(transform)

    return IcpResult(transform, mean_dist, iterations, converged)


def _fit_plane_from_pairs(originals, mapped, index) -> SymmetryPlane | None:
    """Mirror-plane least squares from (point, improperly-mapped point) pairs.

    The difference vectors of true mirror pairs are parallel to the plane
    normal, so the normal is the dominant eigenvector of their second-moment
    matrix; the plane passes through the centroid of the pair midpoints.
    Pairs whose mapped point misses the target surface badly (occlusion,
    asymmetric regions) are rejected at 3x the median miss.
    """
    miss, _ = index.query(mapped)
    keep = miss <= 3.0 * np.median(miss)
    if keep.sum() < 3:
        return None
    orig = originals[keep]
    img = mapped[keep]
    diff = orig - img
    mag = np.linalg.norm(diff, axis=1)
    moving = mag > 1e-6
    if moving.sum() < 1:
        return None
    moment = diff[moving].T @ diff[moving]
    _, vecs = np.linalg.eigh(moment)
    normal = canonical_normal(vecs[:, -1])
    midpoint = 0.5 * (orig + img).mean(axis=0)
    return SymmetryPlane(normal, -float(normal @ midpoint))


def refine_plane(
    cloud,
    initial: SymmetryPlane,
    cfg: IcpConfig = IcpConfig(),
    *,
    max_rounds: int = 3,
    min_normal_change_deg: float = 0.05,
    icp_sample_limit: int | None = None,
    target_index: NearestNeighborIndex | None = None,
    residual_fn=None,
) -> PlaneRefinement:
    """Refine a symmetry plane by reflect -> register -> fit rounds.

    Each round reflects the cloud by the current plane, registers the
    reflection onto the original cloud with ICP, and re-fits the plane from
    the resulting mirror pairs.  Rounds stop early once the normal moves less
    than ``min_normal_change_deg``.  The best plane seen (by residual) is
    returned; if nothing beats the initial plane it is returned unrefined.

    ``residual_fn`` overrides the residual metric (default: symmetric Chamfer
    of the cloud against its reflection).  ``icp_sample_limit`` registers a
    strided subset of the reflected cloud for speed; the fit still uses exact
    index pairing, so accuracy is limited only by pair count.
    """
    pts = as_cloud(cloud)
    _check_not_degenerate(pts, "cloud")
    index = target_index if target_index is not None else NearestNeighborIndex(pts)
    if residual_fn is None:
        residual_fn = lambda plane: chamfer(pts, reflect_cloud(pts, plane))

    if icp_sample_limit is not None and len(pts) > icp_sample_limit:
        stride = int(math.ceil(len(pts) / icp_sample_limit))
        sub = pts[::stride]
    else:
        sub = pts

    best_plane = initial
    best_residual = float(residual_fn(initial))
    refined = False
    current = initial
    rounds = 0

    for rounds in range(1, max_rounds + 1):
        reflected = reflect_cloud(sub, current)
        try:
            result = icp_register(reflected, pts, cfg, target_index=index)
        except DegenerateCloud:
            break
        mapped = result.transform.apply(reflected)
        fitted = _fit_plane_from_pairs(sub, mapped, index)
        if fitted is None:
            break
        residual = float(residual_fn(fitted))
        if residual < best_residual:
            best_plane, best_residual, refined = fitted, residual, True
        change = geodesic_deg(fitted.normal, current.normal)
        current = fitted
        if change < min_normal_change_deg:
            break

    return PlaneRefinement(best_plane, best_residual, rounds, refined)
