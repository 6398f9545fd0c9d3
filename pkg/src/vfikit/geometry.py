"""Geometric primitives for virtual fixtures: Plücker lines, planes, cylinders.

All lengths are meters.  A Plücker line is ``l + eps*m`` with unit direction
``l`` and moment ``m = p x l`` for any point ``p`` on the line.  A plane is
``n + eps*d`` with unit normal ``n`` and signed offset ``d = <p, n>`` for any
point ``p`` on the plane.
"""

from dataclasses import dataclass

import numpy as np

from .quatalg import (
    DualQuaternion,
    PureQuaternion,
    Quaternion,
    UnitDualQuaternion,
    pose_rotation,
    pose_translation,
    rotate_vec,
)

# Directions with a cross-product norm below this are treated as parallel.
PARALLEL_TOL = 1e-9


@dataclass(frozen=True)
class PluckerLine:
    """Infinite line with unit direction and moment, both R^3 arrays."""

    direction: np.ndarray
    moment: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        m = np.asarray(self.moment, dtype=float)
        n = np.linalg.norm(d)
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"line direction must be unit norm, got {n!r}")
        d = d / n
        if abs(d @ m) > 1e-9 * max(1.0, np.linalg.norm(m)):
            raise ValueError("invalid Plücker pair: <direction, moment> != 0")
        d.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "moment", m)

    @classmethod
    def from_point_direction(cls, point, direction) -> "PluckerLine":
        direction = np.asarray(direction, dtype=float)
        direction = direction / np.linalg.norm(direction)
        point = np.asarray(point, dtype=float)
        return cls(direction, np.cross(point, direction))

    def point_closest_to_origin(self) -> np.ndarray:
        return np.cross(self.direction, self.moment)

    def as_dual_quaternion(self) -> DualQuaternion:
        return DualQuaternion(
            PureQuaternion.from_vec3(self.direction),
            PureQuaternion.from_vec3(self.moment),
        )


@dataclass(frozen=True)
class Plane:
    """Oriented plane <p, normal> = offset with unit normal."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        nn = np.linalg.norm(n)
        if abs(nn - 1.0) > 1e-6:
            raise ValueError(f"plane normal must be unit norm, got {nn!r}")
        n = n / nn
        n.setflags(write=False)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    def as_dual_quaternion(self) -> DualQuaternion:
        return DualQuaternion(
            PureQuaternion.from_vec3(self.normal), Quaternion(self.offset)
        )


@dataclass(frozen=True)
class Cylinder:
    """Infinite circular cylinder around a line axis."""

    axis: PluckerLine
    radius: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"cylinder radius must be positive, got {self.radius!r}")


def _as_vec3(p) -> np.ndarray:
    if isinstance(p, PureQuaternion):
        return p.vec3()
    if isinstance(p, Quaternion):
        return p.vec3()
    return np.asarray(p, dtype=float)


def _pose_rt(x) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(x, UnitDualQuaternion):
        c = x.vec8()
    else:
        c = np.asarray(x, dtype=float)
    return pose_rotation(c), pose_translation(c)


def line_from_pose(x, axis=(0.0, 0.0, 1.0)) -> PluckerLine:
    """Line through a pose's origin along a body axis (default: z-axis).

    Direction is ``r*axis*r'``, moment ``t x direction``.
    """
    r, t = _pose_rt(x)
    axis = _as_vec3(axis)
    n = np.linalg.norm(axis)
    if abs(n - 1.0) > 1e-6:
        raise ValueError("axis must be a unit vector")
    d = rotate_vec(r, axis / n)
    return PluckerLine(d, np.cross(t, d))


def plane_from_pose(x, normal_axis=(0.0, 0.0, 1.0), offset: float = 0.0) -> Plane:
    """Plane with normal along a body axis, displaced ``offset`` from the origin.

    The plane offset is ``<t, n> + offset``, so the plane passes through the
    pose origin shifted by ``offset`` along the rotated normal.
    """
    r, t = _pose_rt(x)
    axis = _as_vec3(normal_axis)
    n = rotate_vec(r, axis / np.linalg.norm(axis))
    return Plane(n, float(t @ n) + offset)


def point_line_sq_distance(line: PluckerLine, p) -> float:
    """Squared Euclidean distance from point ``p`` to an infinite line."""
    p = _as_vec3(p)
    e = np.cross(p, line.direction) - line.moment
    return float(e @ e)


def point_plane_signed_distance(plane: Plane, p) -> float:
    """Signed distance <p, n> - d; positive on the normal side of the plane."""
    p = _as_vec3(p)
    return float(p @ plane.normal) - plane.offset


def line_line_distance(l1: PluckerLine, l2: PluckerLine) -> float:
    """Minimum distance between two infinite lines.

    For parallel lines the generic skew formula degenerates, so the distance
    falls back to the point-to-line distance of one line's anchor point.
    """
    c = np.cross(l1.direction, l2.direction)
    cn = np.linalg.norm(c)
    if cn < PARALLEL_TOL:
        return float(np.sqrt(point_line_sq_distance(l1, l2.point_closest_to_origin())))
    recip = float(l1.direction @ l2.moment + l2.direction @ l1.moment)
    return abs(recip) / cn


def closest_point_on_cylinder(c: Cylinder, p) -> tuple[np.ndarray, bool]:
    """Point on the cylinder surface closest to ``p`` plus a degeneracy flag.

    When ``p`` lies on the axis the radial direction is undefined; the
    returned point then uses a fixed reference direction orthogonal to the
    axis and the flag is True so callers can substitute their own fallback.
    """
    p = _as_vec3(p)
    p0 = c.axis.point_closest_to_origin()
    v = p - p0
    axial = float(v @ c.axis.direction)
    foot = p0 + axial * c.axis.direction
    radial = p - foot
    rn = np.linalg.norm(radial)
    if rn < 1e-12:
        return foot + c.radius * _reference_orthogonal(c.axis.direction), True
    return foot + (c.radius / rn) * radial, False


def _reference_orthogonal(d: np.ndarray) -> np.ndarray:
    """Deterministic unit vector orthogonal to ``d``."""
    # pick the world axis least aligned with d to avoid a degenerate cross
    basis = np.eye(3)
    k = int(np.argmin(np.abs(d)))
    v = np.cross(d, basis[k])
    return v / np.linalg.norm(v)
