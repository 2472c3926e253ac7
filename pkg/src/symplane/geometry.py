"""Geometric primitives: unit normals, oriented planes, reflections, quaternions.

Conventions used throughout the library:

* A plane is the zero set ``{x : n . x + d = 0}`` of a unit normal ``n`` and a
  signed offset ``d``.  The reflection across it is the homogeneous involution
  with linear part ``I - 2 n n^T`` and translation ``-2 d n``.
* ``n`` and ``-n`` (with ``d`` and ``-d``) describe the same plane.  The
  canonical representative makes the first component of ``n`` whose magnitude
  exceeds 1e-9 positive.
* Hypothesis/sample directions live on the upper hemisphere (``z >= 0``); a
  vector on the equator falls back to the plane canonicalization rule.
* All angles crossing a public interface are degrees.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_CANON_EPS = 1e-9
_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))

# Fraction of the ideal equal-area spacing by which hemisphere samples stand
# off the equator.  Without the standoff, samples on opposite sides of the
# equator are nearly antipodal, i.e. nearly the same plane, and the minimum
# sign-invariant spacing collapses (13.6 deg instead of 21 deg at n=31).
_EQUATOR_STANDOFF = 0.3


def unit_vector(v) -> np.ndarray:
    """Return v / ||v|| as float64, raising on zero length."""
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < _CANON_EPS:
        raise ValueError("cannot normalize a zero-length vector")
    return v / n


def canonical_normal(v) -> np.ndarray:
    """Flip v so its first component with magnitude > 1e-9 is positive.

    Maps n and -n to one representative; idempotent.
    """
    v = np.asarray(v, dtype=float)
    for c in v:
        if abs(c) > _CANON_EPS:
            return -v if c < 0 else v.copy()
    return v.copy()


def hemisphere_normal(v) -> np.ndarray:
    """Flip v into the upper hemisphere (z >= 0).

    Equator vectors (|z| <= 1e-9) use the plane canonicalization rule so the
    open boundary still has a unique representative.
    """
    v = np.asarray(v, dtype=float)
    if abs(v[2]) <= _CANON_EPS:
        return canonical_normal(v)
    return -v if v[2] < 0 else v.copy()


@dataclass(frozen=True)
class SymmetryPlane:
    """Oriented plane ``n . x + d = 0`` stored in canonical antipodal form."""

    normal: np.ndarray
    offset: float = 0.0

    def __post_init__(self):
        n = unit_vector(self.normal)
        d = float(self.offset)
        if not math.isfinite(d):
            raise ValueError("plane offset must be finite")
        canon = canonical_normal(n)
        if float(canon @ n) < 0:
            d = -d
        object.__setattr__(self, "normal", canon)
        object.__setattr__(self, "offset", d)

    def signed_distance(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return points @ self.normal + self.offset


def reflection_matrix(plane: SymmetryPlane) -> np.ndarray:
    """Homogeneous 4x4 reflection across the plane.

    Linear part ``I - 2 n n^T`` (orthogonal, det -1), translation ``-2 d n``.
    """
    n = plane.normal
    m = np.eye(4)
    m[:3, :3] -= 2.0 * np.outer(n, n)
    m[:3, 3] = -2.0 * plane.offset * n
    return m


def reflect_point(plane: SymmetryPlane, point) -> np.ndarray:
    """Reflect a single point across the plane."""
    p = np.asarray(point, dtype=float)
    return p - 2.0 * (float(p @ plane.normal) + plane.offset) * plane.normal


def reflect_points(plane: SymmetryPlane, points) -> np.ndarray:
    """Reflect an (n, 3) array of points across the plane."""
    pts = np.asarray(points, dtype=float)
    return pts - 2.0 * (pts @ plane.normal + plane.offset)[:, None] * plane.normal


def geodesic_deg(u, v, sign_invariant: bool = True) -> float:
    """Angle between two unit directions in degrees.

    With ``sign_invariant`` (the plane-normal metric) the result is
    ``min(theta, 180 - theta)`` and never exceeds 90; otherwise it is the
    literal ``arccos(u . v)`` in [0, 180].
    """
    d = float(np.clip(np.asarray(u, dtype=float) @ np.asarray(v, dtype=float), -1.0, 1.0))
    if sign_invariant:
        d = abs(d)
    return math.degrees(math.acos(d))


def sample_hemisphere(n: int) -> np.ndarray:
    """Deterministic near-uniform unit directions on the upper hemisphere.

    A spherical Fibonacci spiral over ``z`` in ``[z_floor, 1)``; the equator
    standoff ``z_floor`` keeps the minimum pairwise sign-invariant spacing
    within 25% of the ideal equal-area value sqrt(2*pi/n).  Output is bitwise
    reproducible: no randomness is involved.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if n == 1:
        return np.array([[0.0, 0.0, 1.0]])
    ideal = math.sqrt(2.0 * math.pi / n)
    z_floor = math.sin(min(_EQUATOR_STANDOFF * ideal, 0.45 * math.pi))
    i = np.arange(n)
    z = 1.0 - (1.0 - z_floor) * (i + 0.5) / n
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = i * _GOLDEN_ANGLE
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


# ---------------------------------------------------------------------------
# Quaternions, stored as (w, x, y, z) ndarrays with w >= 0 (double cover).


def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_canonical(q) -> np.ndarray:
    """Normalize and fix the double cover (w >= 0; w == 0 uses the sign of the axis)."""
    q = np.asarray(q, dtype=float)
    nrm = np.linalg.norm(q)
    if nrm < _CANON_EPS:
        raise ValueError("cannot normalize a zero quaternion")
    q = q / nrm
    for c in q:
        if abs(c) > _CANON_EPS:
            return -q if c < 0 else q
    return q


def quat_from_axis_angle(axis, angle_rad: float) -> np.ndarray:
    a = unit_vector(axis)
    half = 0.5 * angle_rad
    return quat_canonical(np.concatenate([[math.cos(half)], math.sin(half) * a]))


def quat_angle_deg(q) -> float:
    """Rotation angle of a unit quaternion in degrees."""
    w = abs(float(np.clip(q[0], -1.0, 1.0)))
    return math.degrees(2.0 * math.acos(w))


def quat_rotate(q, v) -> np.ndarray:
    """Rotate vector(s) v by unit quaternion q."""
    q = np.asarray(q, dtype=float)
    v = np.asarray(v, dtype=float)
    w, xyz = q[0], q[1:]
    t = 2.0 * np.cross(xyz, v)
    return v + w * t + np.cross(xyz, t)


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def shortest_arc(u, v) -> np.ndarray:
    """Minimal rotation carrying unit vector u onto unit vector v.

    For u ~ -v the arc is a half turn about an arbitrary perpendicular axis;
    a deterministic one is chosen.
    """
    u = unit_vector(u)
    v = unit_vector(v)
    d = float(u @ v)
    if d < -1.0 + 1e-12:
        axis = np.cross(u, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-6:
            axis = np.cross(u, [0.0, 1.0, 0.0])
        return quat_from_axis_angle(axis, math.pi)
    q = np.concatenate([[1.0 + d], np.cross(u, v)])
    return quat_canonical(q)


def apply_residual(hypothesis, q) -> np.ndarray:
    """Rotate a hypothesis direction by a residual quaternion.

    The result is renormalized and flipped to the upper hemisphere, matching
    the convention of hypothesis banks and ground-truth normals.
    """
    rotated = quat_rotate(q, unit_vector(hypothesis))
    return hemisphere_normal(rotated / np.linalg.norm(rotated))


# ---------------------------------------------------------------------------
# Rigid transforms.


def rotation_z(angle_deg: float) -> np.ndarray:
    a = math.radians(angle_deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotation_y(angle_deg: float) -> np.ndarray:
    a = math.radians(angle_deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


@dataclass(frozen=True)
class RigidTransform:
    """Proper rigid motion ``x -> R x + t``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float)
        if r.shape != (3, 3) or t.shape != (3,):
            raise ValueError("rotation must be 3x3 and translation length 3")
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-7):
            raise ValueError("rotation is not orthonormal")
        if np.linalg.det(r) < 0:
            raise ValueError("rotation must be proper (det +1)")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        """self o other: apply ``other`` first."""
        return RigidTransform(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def inverse(self) -> "RigidTransform":
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)
