"""Evaluation of predicted plane normals against ground truth.

All distances are sign-invariant geodesics (plane normals are projective), so
no value exceeds 90 degrees.  F@phi is the harmonic mean of precision@phi and
recall@phi where a pair matches strictly below phi; the average geodesic
distance combines mean prediction-to-nearest-truth and truth-to-nearest-
prediction distances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import EmptyGroundTruth
from .geometry import hemisphere_normal, unit_vector

DEFAULT_THRESHOLDS = (5.0, 15.0, 30.0, 50.0)

# Convention for an empty prediction set: precision is undefined and reported
# as 0, and unmatched elements contribute the maximal sign-invariant distance,
# keeping the average geodesic distance bounded and monotone.
_MAX_DISTANCE_DEG = 90.0


@dataclass(frozen=True)
class MetricsReport:
    """Per-object symmetry metrics.

    ``f_at[phi]`` is the harmonic mean of ``precision_at[phi]`` and
    ``recall_at[phi]`` (0 when both vanish); ``gd_deg`` is the average
    geodesic distance.
    """

    f_at: dict[float, float]
    precision_at: dict[float, float]
    recall_at: dict[float, float]
    gd_deg: float
    n_pred: int
    n_gt: int


def _as_normals(vectors) -> np.ndarray:
    arr = np.array([unit_vector(v) for v in vectors], dtype=float)
    return arr.reshape(-1, 3)


def _cross_distance_deg(a, b) -> np.ndarray:
    dots = np.abs(np.clip(a @ b.T, -1.0, 1.0))
    return np.degrees(np.arccos(dots))


def evaluate(
    predictions,
    ground_truth,
    thresholds=DEFAULT_THRESHOLDS,
    matching: str = "nearest",
) -> MetricsReport:
    """Score predicted normals against ground-truth normals.

    ``matching="nearest"`` (default) matches each element to its closest
    counterpart, so many-to-one matches are allowed; ``matching="one-to-one"``
    solves the optimal assignment instead, for sensitivity analysis.  An empty
    ground truth raises EmptyGroundTruth; report such objects as n_gt = 0
    rather than scoring them.
    """
    gt = _as_normals(ground_truth)
    if len(gt) == 0:
        raise EmptyGroundTruth("cannot evaluate against an empty ground-truth set")
    pred = _as_normals(predictions)
    thresholds = [float(t) for t in thresholds]

    if matching not in ("nearest", "one-to-one"):
        raise ValueError(f"unknown matching mode {matching!r}")

    if len(pred) == 0:
        pred_dist = np.array([])
        gt_dist = np.full(len(gt), _MAX_DISTANCE_DEG)
    elif matching == "nearest":
        cross = _cross_distance_deg(pred, gt)
        pred_dist = cross.min(axis=1)
        gt_dist = cross.min(axis=0)
    else:
        cross = _cross_distance_deg(pred, gt)
        rows, cols = linear_sum_assignment(cross)
        pred_dist = np.full(len(pred), _MAX_DISTANCE_DEG)
        gt_dist = np.full(len(gt), _MAX_DISTANCE_DEG)
        pred_dist[rows] = cross[rows, cols]
        gt_dist[cols] = cross[rows, cols]

    precision_at, recall_at, f_at = {}, {}, {}
    for phi in thresholds:
        precision = float((pred_dist < phi).mean()) if len(pred) else 0.0
        recall = float((gt_dist < phi).mean())
        denom = precision + recall
        precision_at[phi] = precision
        recall_at[phi] = recall
        f_at[phi] = 2.0 * precision * recall / denom if denom > 0 else 0.0

    theta_p = float(pred_dist.mean()) if len(pred) else _MAX_DISTANCE_DEG
    theta_r = float(gt_dist.mean())
    return MetricsReport(
        f_at=f_at,
        precision_at=precision_at,
        recall_at=recall_at,
        gd_deg=0.5 * (theta_p + theta_r),
        n_pred=len(pred),
        n_gt=len(gt),
    )


def random_guess(n: int, seed: int) -> np.ndarray:
    """n independent uniform directions on the upper hemisphere (seeded).

    Gaussian samples normalized to the sphere, then flipped into the
    hemisphere; this is the uniform distribution on plane normals.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    flip = v[:, 2] < 0
    v[flip] = -v[flip]
    # the equator (z ~ 0) is measure zero but still handled deterministically
    boundary = np.abs(v[:, 2]) <= 1e-9
    if boundary.any():
        v[boundary] = [hemisphere_normal(x) for x in v[boundary]]
    return v
