"""Multi-view aggregation: rotate per-view plane predictions into a common
reference frame and cluster them on the projective sphere.

Clustering is agglomerative with average linkage under the sign-invariant
geodesic, cut at a fixed angular threshold; a K is never needed.  Cluster
centers are the dominant eigenvector of the confidence-weighted outer-product
sum of member normals, which is the spherical mean that cannot be corrupted
by antipodal sign flips.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.spatial.distance import squareform

from .geometry import SymmetryPlane, canonical_normal, rotation_y, rotation_z
from .hypotheses import Prediction


@dataclass(frozen=True)
class ViewPose:
    """Camera pose of one view relative to the reference (input) view.

    The rotation maps view-frame coordinates into the reference frame:
    ``R = Rz(azimuth) @ Ry(-elevation)``, identity at (0, 0).  Views orbiting
    at a shared elevation differ only in azimuth about +z.
    """

    azimuth_deg: float
    elevation_deg: float = 0.0

    @property
    def rotation(self) -> np.ndarray:
        return rotation_z(self.azimuth_deg) @ rotation_y(-self.elevation_deg)


@dataclass(frozen=True)
class AggregationConfig:
    cluster_threshold_deg: float = 30.0
    min_cluster_size: int = 2
    confidence_floor: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.cluster_threshold_deg < 90.0:
            raise ValueError("cluster_threshold_deg must lie in (0, 90)")
        if self.min_cluster_size < 1:
            raise ValueError("min_cluster_size must be >= 1")


@dataclass(frozen=True)
class ClusteredPrediction:
    plane: SymmetryPlane
    support: int
    mean_confidence: float


def to_reference_frame(predictions, pose: ViewPose) -> list[Prediction]:
    """Rotate a view's predictions into the reference frame.

    Pure rotation about the origin: normals rotate, offsets are invariant
    (planes through the origin stay through the origin); canonicalization is
    reapplied by the plane constructor.
    """
    r = pose.rotation
    return [
        Prediction(SymmetryPlane(r @ p.plane.normal, p.plane.offset), p.confidence)
        for p in predictions
    ]


def _sign_invariant_matrix_deg(normals) -> np.ndarray:
    dots = np.abs(np.clip(normals @ normals.T, -1.0, 1.0))
    np.fill_diagonal(dots, 1.0)
    return np.degrees(np.arccos(dots))


def _weighted_center(normals, weights) -> np.ndarray:
    moment = (normals * weights[:, None]).T @ normals
    _, vecs = np.linalg.eigh(moment)
    return canonical_normal(vecs[:, -1])


def _cut(normals, threshold_deg, method) -> list[np.ndarray]:
    if len(normals) == 1:
        return [np.array([0])]
    dist = squareform(_sign_invariant_matrix_deg(normals), checks=False)
    labels = fcluster(linkage(dist, method=method), t=threshold_deg, criterion="distance")
    return [np.flatnonzero(labels == lab) for lab in np.unique(labels)]


def cluster_normals(prediction_sets, cfg: AggregationConfig = AggregationConfig()) -> list[ClusteredPrediction]:
    """Cluster predictions (already in one frame) into consensus planes.

    Predictions below the confidence floor are dropped.  Average-linkage
    clusters are cut at the angular threshold; any cluster whose members
    stray farther than the threshold from its center (a rare average-linkage
    artifact) is re-split with complete linkage.  Clusters smaller than
    ``min_cluster_size`` are discarded.  Results are ordered by descending
    support, then mean confidence.
    """
    flat = [p for preds in prediction_sets for p in preds]
    flat = [p for p in flat if p.confidence >= cfg.confidence_floor]
    if not flat:
        return []
    # canonical lexicographic order makes the linkage independent of input order
    flat.sort(key=lambda p: (tuple(p.plane.normal), p.confidence))
    normals = np.array([p.plane.normal for p in flat])
    confidences = np.array([p.confidence for p in flat])
    offsets = np.array([p.plane.offset for p in flat])

    clusters = []
    pending = _cut(normals, cfg.cluster_threshold_deg, "average")
    while pending:
        members = pending.pop()
        center = _weighted_center(normals[members], confidences[members])
        spread = np.degrees(
            np.arccos(np.abs(np.clip(normals[members] @ center, -1.0, 1.0)))
        )
        if len(members) > 1 and spread.max() > cfg.cluster_threshold_deg:
            pending.extend(
                members[part]
                for part in _cut(normals[members], cfg.cluster_threshold_deg, "complete")
            )
            continue
        clusters.append((members, center))

    out = []
    for members, center in clusters:
        if len(members) < cfg.min_cluster_size:
            continue
        # align member offsets with the center's orientation before averaging
        signs = np.sign(normals[members] @ center)
        signs[signs == 0] = 1.0
        w = confidences[members]
        scale = w.sum() if w.sum() > 0 else float(len(members))
        weights = w / scale if w.sum() > 0 else np.full(len(members), 1.0 / len(members))
        offset = float((signs * offsets[members]) @ weights)
        out.append(
            ClusteredPrediction(
                SymmetryPlane(center, offset), len(members), float(w.mean())
            )
        )
    out.sort(key=lambda c: (-c.support, -c.mean_confidence, tuple(c.plane.normal)))
    return out


def aggregate_views(per_view, cfg: AggregationConfig = AggregationConfig()) -> list[ClusteredPrediction]:
    """Rotate every view's predictions into the reference frame, then cluster.

    ``per_view`` is an iterable of (predictions, ViewPose) pairs.
    """
    all_sets = [to_reference_frame(preds, pose) for preds, pose in per_view]
    return cluster_normals(all_sets, cfg)
