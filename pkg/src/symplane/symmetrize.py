"""Exploiting a detected symmetry: align a plane direction to a shape and
densify the shape with reflected points.

These are the point-cloud primitives of symmetry-aware shape optimization:
a detector provides only the plane direction, alignment resolves the offset
(and polishes the direction) against actual geometry, and densification
appends a sampled fraction of the reflected cloud to pull an optimizer
toward symmetry.  Scheduling (e.g. densifying every N optimization steps)
belongs to the caller.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import as_cloud, reflect_cloud
from .errors import InitialDirectionRejected
from .geometry import SymmetryPlane, geodesic_deg, unit_vector
from .registration import IcpConfig, refine_plane

# Refinement drifting farther than this from the requested direction means the
# detected symmetry and the shape disagree; matches the aggregation threshold.
_MAX_DIRECTION_DRIFT_DEG = 30.0


@dataclass(frozen=True)
class AlignmentResult:
    """Aligned plane (direction plus resolved offset) and its reflective residual."""

    plane: SymmetryPlane
    residual: float
    iterations: int


def align_plane(points, direction, cfg: IcpConfig = IcpConfig()) -> AlignmentResult:
    """Resolve a plane direction against a cloud: offset first, then ICP polish.

    The initial plane passes through the centroid (offset -direction.centroid);
    reflective ICP refinement then corrects both offset and direction.  If the
    refined normal leaves a 30 degree cone around the input direction the
    direction is rejected rather than silently replaced by a different
    symmetry of the shape.
    """
    pts = as_cloud(points)
    d = unit_vector(direction)
    initial = SymmetryPlane(d, -float(d @ pts.mean(axis=0)))
    result = refine_plane(pts, initial, cfg)
    if geodesic_deg(result.plane.normal, d) > _MAX_DIRECTION_DRIFT_DEG:
        raise InitialDirectionRejected(
            "refined plane drifted more than "
            f"{_MAX_DIRECTION_DRIFT_DEG:g} degrees from the requested direction"
        )
    return AlignmentResult(result.plane, result.residual, result.rounds)


def densify(points, plane: SymmetryPlane, fraction: float, seed: int) -> np.ndarray:
    """Append a random fraction of the reflected cloud to the cloud.

    Exactly ``floor(fraction * n)`` reflected points are drawn without
    replacement (seeded), so the output has ``floor((1 + fraction) * n)``
    points and every appended point is the exact reflection of an input
    point.  Appending reflected points can only tighten the cloud's
    reflective Chamfer about the plane.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1]")
    pts = as_cloud(points)
    count = int(fraction * len(pts))
    if count == 0:
        return pts.copy()
    reflected = reflect_cloud(pts, plane)
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(pts), size=count, replace=False)
    return np.vstack([pts, reflected[picked]])
