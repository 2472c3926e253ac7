"""Hypothesis bank geometry: ground-truth assignment, residual quaternions,
and reconstruction of plane predictions from per-hypothesis outputs.

This is the geometric half of a hypothesis-classification detector: it turns
ground-truth plane normals into per-hypothesis training targets and maps
per-hypothesis (probability, residual quaternion) arrays back into planes.
The arrays may come from any external classifier; none is bundled here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AntipodalAmbiguity, CollisionWarning
from .geometry import (
    SymmetryPlane,
    apply_residual,
    hemisphere_normal,
    quat_identity,
    sample_hemisphere,
    shortest_arc,
    unit_vector,
)

DEFAULT_BANK_SIZE = 31


@dataclass(frozen=True)
class HypothesisBank:
    """Fixed unit directions spanning the upper hemisphere."""

    normals: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.normals, dtype=float).reshape(-1, 3)
        if len(n) == 0:
            raise ValueError("hypothesis bank is empty")
        object.__setattr__(self, "normals", n)

    @classmethod
    def default(cls, n: int = DEFAULT_BANK_SIZE) -> "HypothesisBank":
        return cls(sample_hemisphere(n))

    def __len__(self) -> int:
        return len(self.normals)


@dataclass(frozen=True)
class Prediction:
    """One detected plane with its classification confidence."""

    plane: SymmetryPlane
    confidence: float


@dataclass(frozen=True)
class TrainingTargets:
    """Per-hypothesis classification labels and residual rotations.

    ``residuals[i]`` is meaningful only where ``labels[i]`` is True (identity
    elsewhere); ``gt_index[i]`` records which ground-truth normal the
    hypothesis was assigned, -1 for negatives.
    """

    labels: np.ndarray
    residuals: np.ndarray
    gt_index: np.ndarray


def residual_between(hypothesis, gt) -> np.ndarray:
    """Shortest-arc quaternion carrying the hypothesis onto the ground truth.

    The ground truth is first flipped to the sign nearer the hypothesis, since
    +/-n name the same plane.  Raises AntipodalAmbiguity at 90 degrees, where
    the two flips tie.
    """
    h = unit_vector(hypothesis)
    g = unit_vector(gt)
    d = float(h @ g)
    if abs(d) < 1e-9:
        raise AntipodalAmbiguity("hypothesis and ground truth are 90 degrees apart")
    if d < 0:
        g = -g
    return shortest_arc(h, g)


def _pairwise_sign_invariant_deg(a, b) -> np.ndarray:
    dots = np.abs(np.clip(np.asarray(a) @ np.asarray(b).T, -1.0, 1.0))
    return np.degrees(np.arccos(dots))


def assign_ground_truth(bank: HypothesisBank, gt_normals) -> TrainingTargets:
    """Match each ground-truth normal to its nearest hypothesis.

    Nearest is by sign-invariant geodesic, ties broken by the lower hypothesis
    index.  If two ground truths claim the same hypothesis the closer one wins
    and a CollisionWarning is emitted for the other (hypothesis banks are
    spaced so this should not happen for realistic plane sets).
    """
    n = len(bank)
    labels = np.zeros(n, dtype=bool)
    residuals = np.tile(quat_identity(), (n, 1))
    gt_index = np.full(n, -1, dtype=np.int64)
    gt_list = [hemisphere_normal(unit_vector(g)) for g in gt_normals]
    if not gt_list:
        return TrainingTargets(labels, residuals, gt_index)

    dist = _pairwise_sign_invariant_deg(np.asarray(gt_list), bank.normals)
    best = dist.argmin(axis=1)
    for gi in np.argsort(dist[np.arange(len(gt_list)), best], kind="stable"):
        hi = int(best[gi])
        if labels[hi]:
            warnings.warn(
                f"ground-truth normal {gi} collides with {int(gt_index[hi])} "
                f"on hypothesis {hi}; dropping the farther one",
                CollisionWarning,
                stacklevel=2,
            )
            continue
        labels[hi] = True
        gt_index[hi] = gi
        residuals[hi] = residual_between(bank.normals[hi], gt_list[gi])
    return TrainingTargets(labels, residuals, gt_index)


def reconstruct_predictions(
    bank: HypothesisBank,
    probabilities,
    residuals,
    prob_threshold: float = 0.5,
) -> list[Prediction]:
    """Planes implied by per-hypothesis probabilities and residual rotations.

    Every hypothesis with probability >= threshold contributes a plane whose
    normal is the hypothesis rotated by its residual; offsets are left at zero
    (the offset is not observable at this stage) and the probability becomes
    the confidence.
    """
    probs = np.asarray(probabilities, dtype=float)
    quats = np.asarray(residuals, dtype=float).reshape(-1, 4)
    if probs.shape != (len(bank),) or quats.shape != (len(bank), 4):
        raise ValueError("need one probability and one quaternion per hypothesis")
    if probs.min() < 0.0 or probs.max() > 1.0:
        raise ValueError("probabilities must lie in [0, 1]")
    out = []
    for i in np.flatnonzero(probs >= prob_threshold):
        normal = apply_residual(bank.normals[i], quats[i])
        out.append(Prediction(SymmetryPlane(normal, 0.0), float(probs[i])))
    return out
