"""Quaternion and dual quaternion algebra.

Conventions used throughout the package:

* Quaternion coefficients are stored scalar-first, ``(w, x, y, z)``, so that
  ``h = w + x*i + y*j + z*k`` with ``i**2 = j**2 = k**2 = i*j*k = -1``.
* A dual quaternion ``h + eps*h'`` (``eps**2 = 0``) is stored as the 8-vector
  ``(primary[0:4], dual[4:8])``.
* ``vec3`` maps a pure quaternion to R^3, ``vec4`` a quaternion to R^4 and
  ``vec8`` a dual quaternion to R^8, all following the storage order above.
* A unit dual quaternion encodes a rigid pose as ``x = r + eps*(1/2)*t*r``
  where ``r`` is a unit quaternion (rotation) and ``t`` a pure quaternion
  (translation, meters).

The module-level functions operate on plain ``numpy`` arrays and are the fast
path used by the kinematics and control loops.  The ``Quaternion`` /
``DualQuaternion`` classes are thin immutable wrappers for code that prefers
an algebraic API.
"""

import numpy as np

# Tolerance below which a unit-norm deviation is considered integration drift
# and silently renormalized; anything above is treated as a usage error.
UNIT_DRIFT_TOL = 1e-6


# ---------------------------------------------------------------------------
# array kernels
# ---------------------------------------------------------------------------

def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of two quaternions given as (w, x, y, z) arrays."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def qconj(a: np.ndarray) -> np.ndarray:
    """Quaternion conjugate (negated imaginary part)."""
    return np.array([a[0], -a[1], -a[2], -a[3]])


def qnorm(a: np.ndarray) -> float:
    return float(np.sqrt(a @ a))


def dqmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dual quaternion product: (p+eps d)(p'+eps d') = pp' + eps(pd' + dp')."""
    out = np.empty(8)
    out[:4] = qmul(a[:4], b[:4])
    out[4:] = qmul(a[:4], b[4:]) + qmul(a[4:], b[:4])
    return out


def dqconj(a: np.ndarray) -> np.ndarray:
    """Conjugate both quaternion parts."""
    return np.array([a[0], -a[1], -a[2], -a[3], a[4], -a[5], -a[6], -a[7]])


def rotate_vec(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate an R^3 vector by the unit quaternion ``r`` (sandwich r v r*)."""
    u = r[1:]
    t = 2.0 * np.cross(u, v)
    return v + r[0] * t + np.cross(u, t)


def pose_from_rt(r: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Unit dual quaternion r + eps*(1/2)*t*r from rotation r and translation t."""
    out = np.empty(8)
    out[:4] = r
    out[4:] = 0.5 * qmul(np.array([0.0, t[0], t[1], t[2]]), r)
    return out


def pose_translation(x: np.ndarray) -> np.ndarray:
    """Translation t = 2 * dual * conj(primary) of a unit dual quaternion, as R^3."""
    return 2.0 * qmul(x[4:], qconj(x[:4]))[1:]


def pose_rotation(x: np.ndarray) -> np.ndarray:
    """Rotation (primary) part of a unit dual quaternion."""
    return x[:4].copy()


def dq_normalize(x: np.ndarray) -> np.ndarray:
    """Project a near-unit dual quaternion back onto the unit group.

    Divides by the dual-number norm: primary is normalized and the dual part
    loses its component along the primary.
    """
    n = qnorm(x[:4])
    p = x[:4] / n
    d = x[4:] / n
    d = d - p * (p @ d)
    return np.concatenate([p, d])


def hamilton_plus4(a: np.ndarray) -> np.ndarray:
    """Left Hamilton operator: vec4(a*b) = hamilton_plus4(a) @ vec4(b)."""
    w, x, y, z = a
    return np.array([
        [w, -x, -y, -z],
        [x, w, -z, y],
        [y, z, w, -x],
        [z, -y, x, w],
    ])


def hamilton_minus4(b: np.ndarray) -> np.ndarray:
    """Right Hamilton operator: vec4(a*b) = hamilton_minus4(b) @ vec4(a)."""
    w, x, y, z = b
    return np.array([
        [w, -x, -y, -z],
        [x, w, z, -y],
        [y, -z, w, x],
        [z, y, -x, w],
    ])


def hamilton_plus8(a: np.ndarray) -> np.ndarray:
    """Left Hamilton operator for dual quaternions (8x8)."""
    out = np.zeros((8, 8))
    hp = hamilton_plus4(a[:4])
    out[:4, :4] = hp
    out[4:, 4:] = hp
    out[4:, :4] = hamilton_plus4(a[4:])
    return out


def hamilton_minus8(b: np.ndarray) -> np.ndarray:
    """Right Hamilton operator for dual quaternions (8x8)."""
    out = np.zeros((8, 8))
    hm = hamilton_minus4(b[:4])
    out[:4, :4] = hm
    out[4:, 4:] = hm
    out[4:, :4] = hamilton_minus4(b[4:])
    return out


# conj(h) as a linear map on vec4
C4 = np.diag([1.0, -1.0, -1.0, -1.0])


def quat_from_axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    """Unit quaternion cos(angle/2) + axis*sin(angle/2); axis must be unit."""
    half = 0.5 * angle
    s = np.sin(half)
    return np.array([np.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def quat_between(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Shortest-arc unit quaternion rotating unit vector ``a`` onto ``b``."""
    c = np.cross(a, b)
    d = float(a @ b)
    if d < -1.0 + 1e-12:
        # antipodal: rotate pi about any axis orthogonal to a
        axis = np.cross(a, np.array([1.0, 0.0, 0.0]))
        if axis @ axis < 1e-12:
            axis = np.cross(a, np.array([0.0, 1.0, 0.0]))
        axis = axis / np.linalg.norm(axis)
        return np.array([0.0, axis[0], axis[1], axis[2]])
    q = np.array([1.0 + d, c[0], c[1], c[2]])
    return q / np.linalg.norm(q)


# ---------------------------------------------------------------------------
# value classes
# ---------------------------------------------------------------------------

class Quaternion:
    """Immutable quaternion value; coefficients (w, x, y, z)."""

    __slots__ = ("_q",)

    def __init__(self, w: float, x: float = 0.0, y: float = 0.0, z: float = 0.0):
        q = np.array([w, x, y, z], dtype=float)
        q.setflags(write=False)
        object.__setattr__(self, "_q", q)

    def __setattr__(self, name, value):
        raise AttributeError("Quaternion is immutable")

    @classmethod
    def from_vec4(cls, v) -> "Quaternion":
        v = np.asarray(v, dtype=float)
        if v.shape != (4,):
            raise ValueError(f"vec4 expects 4 coefficients, got shape {v.shape}")
        return cls(v[0], v[1], v[2], v[3])

    @property
    def w(self) -> float:
        return float(self._q[0])

    @property
    def x(self) -> float:
        return float(self._q[1])

    @property
    def y(self) -> float:
        return float(self._q[2])

    @property
    def z(self) -> float:
        return float(self._q[3])

    def vec4(self) -> np.ndarray:
        return self._q.copy()

    def vec3(self) -> np.ndarray:
        """R^3 image of a pure quaternion.  Raises if the real part is nonzero."""
        if abs(self._q[0]) > 1e-12:
            raise ValueError(f"vec3 requires a pure quaternion, got w={self._q[0]!r}")
        return self._q[1:].copy()

    def is_pure(self, tol: float = 1e-12) -> bool:
        return abs(self._q[0]) <= tol

    def conj(self) -> "Quaternion":
        return Quaternion(self._q[0], -self._q[1], -self._q[2], -self._q[3])

    def norm(self) -> float:
        return qnorm(self._q)

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_vec4(qmul(self._q, other._q))
        if isinstance(other, (int, float)):
            return Quaternion.from_vec4(self._q * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return Quaternion.from_vec4(self._q * float(other))
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_vec4(self._q + other._q)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_vec4(self._q - other._q)
        return NotImplemented

    def __neg__(self):
        return Quaternion.from_vec4(-self._q)

    def __eq__(self, other):
        return isinstance(other, Quaternion) and bool(np.array_equal(self._q, other._q))

    def __hash__(self):
        return hash(self._q.tobytes())

    def __repr__(self):
        return f"Quaternion({self.w:.12g}, {self.x:.12g}, {self.y:.12g}, {self.z:.12g})"


class PureQuaternion(Quaternion):
    """Quaternion with zero real part; represents a point or vector in R^3."""

    __slots__ = ()

    def __init__(self, x: float, y: float, z: float):
        super().__init__(0.0, x, y, z)

    @classmethod
    def from_vec3(cls, v) -> "PureQuaternion":
        v = np.asarray(v, dtype=float)
        if v.shape != (3,):
            raise ValueError(f"vec3 expects 3 coefficients, got shape {v.shape}")
        return cls(v[0], v[1], v[2])

    def __repr__(self):
        return f"PureQuaternion({self.x:.12g}, {self.y:.12g}, {self.z:.12g})"


class UnitQuaternion(Quaternion):
    """Quaternion constrained to unit norm; represents a rotation.

    Construction renormalizes drift up to ``UNIT_DRIFT_TOL`` and rejects
    anything farther from the unit sphere as a logic error.
    """

    __slots__ = ()

    def __init__(self, w: float, x: float = 0.0, y: float = 0.0, z: float = 0.0):
        n = np.sqrt(w * w + x * x + y * y + z * z)
        if abs(n - 1.0) > UNIT_DRIFT_TOL:
            raise ValueError(f"not a unit quaternion (norm {n!r})")
        super().__init__(w / n, x / n, y / n, z / n)

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(1.0)

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "UnitQuaternion":
        axis = np.asarray(axis, dtype=float)
        n = np.linalg.norm(axis)
        if n < 1e-12:
            raise ValueError("rotation axis must be nonzero")
        return cls.from_vec4(quat_from_axis_angle(axis / n, angle))

    def rotate(self, p: PureQuaternion) -> PureQuaternion:
        """Sandwich product r p r*, returned as an exactly pure quaternion."""
        return PureQuaternion.from_vec3(rotate_vec(self._q, p.vec3()))


class DualQuaternion:
    """Immutable dual quaternion ``primary + eps * dual``."""

    __slots__ = ("_c",)

    def __init__(self, primary: Quaternion, dual: Quaternion):
        c = np.concatenate([primary.vec4(), dual.vec4()])
        c.setflags(write=False)
        object.__setattr__(self, "_c", c)

    def __setattr__(self, name, value):
        raise AttributeError("DualQuaternion is immutable")

    @classmethod
    def from_vec8(cls, v) -> "DualQuaternion":
        v = np.asarray(v, dtype=float)
        if v.shape != (8,):
            raise ValueError(f"vec8 expects 8 coefficients, got shape {v.shape}")
        return cls(Quaternion.from_vec4(v[:4]), Quaternion.from_vec4(v[4:]))

    @property
    def primary(self) -> Quaternion:
        return Quaternion.from_vec4(self._c[:4])

    @property
    def dual(self) -> Quaternion:
        return Quaternion.from_vec4(self._c[4:])

    def vec8(self) -> np.ndarray:
        return self._c.copy()

    def conj(self) -> "DualQuaternion":
        return DualQuaternion.from_vec8(dqconj(self._c))

    def is_pure(self, tol: float = 1e-12) -> bool:
        return abs(self._c[0]) <= tol and abs(self._c[4]) <= tol

    def __mul__(self, other):
        if isinstance(other, DualQuaternion):
            return DualQuaternion.from_vec8(dqmul(self._c, other._c))
        if isinstance(other, (int, float)):
            return DualQuaternion.from_vec8(self._c * float(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return DualQuaternion.from_vec8(self._c * float(other))
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, DualQuaternion):
            return DualQuaternion.from_vec8(self._c + other._c)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, DualQuaternion):
            return DualQuaternion.from_vec8(self._c - other._c)
        return NotImplemented

    def __neg__(self):
        return DualQuaternion.from_vec8(-self._c)

    def __eq__(self, other):
        return isinstance(other, DualQuaternion) and bool(np.array_equal(self._c, other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        return f"DualQuaternion({self._c[:4].tolist()} + eps*{self._c[4:].tolist()})"


class UnitDualQuaternion(DualQuaternion):
    """Dual quaternion on the unit group; represents a rigid pose.

    The unit conditions are ``|primary| = 1`` and ``<primary, dual> = 0``.
    Construction projects small drift back onto the group and rejects larger
    deviations.
    """

    __slots__ = ()

    def __init__(self, primary: Quaternion, dual: Quaternion):
        c = np.concatenate([primary.vec4(), dual.vec4()])
        n = qnorm(c[:4])
        ortho = abs(c[:4] @ c[4:])
        if abs(n - 1.0) > UNIT_DRIFT_TOL or ortho > UNIT_DRIFT_TOL:
            raise ValueError(
                f"not a unit dual quaternion (|primary|={n!r}, <primary,dual>={ortho!r})"
            )
        c = dq_normalize(c)
        super().__init__(Quaternion.from_vec4(c[:4]), Quaternion.from_vec4(c[4:]))

    @classmethod
    def identity(cls) -> "UnitDualQuaternion":
        return cls(Quaternion(1.0), Quaternion(0.0))

    @classmethod
    def from_pose(cls, r: UnitQuaternion, t: PureQuaternion) -> "UnitDualQuaternion":
        """Compose the pose x = r + eps*(1/2)*t*r."""
        c = pose_from_rt(r.vec4(), t.vec3())
        return cls(Quaternion.from_vec4(c[:4]), Quaternion.from_vec4(c[4:]))

    def rotation(self) -> UnitQuaternion:
        return UnitQuaternion.from_vec4(self._c[:4])

    def translation(self) -> PureQuaternion:
        return PureQuaternion.from_vec3(pose_translation(self._c))

    def __mul__(self, other):
        if isinstance(other, UnitDualQuaternion):
            c = dqmul(self._c, other._c)
            return UnitDualQuaternion(
                Quaternion.from_vec4(c[:4]), Quaternion.from_vec4(c[4:])
            )
        return super().__mul__(other)


# ---------------------------------------------------------------------------
# pure-element products
# ---------------------------------------------------------------------------

def _require_pure(*elems) -> None:
    for e in elems:
        if not e.is_pure():
            raise ValueError(f"operand must be pure (zero real part): {e!r}")


def pure_inner(a, b):
    """Inner product -0.5*(ab + ba) of pure elements.

    Returns a float for pure quaternions and a (float, float) primary/dual
    pair for pure dual quaternions.
    """
    _require_pure(a, b)
    if isinstance(a, DualQuaternion) and isinstance(b, DualQuaternion):
        av, bv = a.vec8(), b.vec8()
        return (float(av[1:4] @ bv[1:4]),
                float(av[1:4] @ bv[5:8] + av[5:8] @ bv[1:4]))
    if isinstance(a, Quaternion) and isinstance(b, Quaternion):
        return float(a.vec4()[1:] @ b.vec4()[1:])
    raise TypeError("pure_inner expects two quaternions or two dual quaternions")


def pure_cross(a, b):
    """Cross product 0.5*(ab - ba) of pure elements; returns the same type."""
    _require_pure(a, b)
    if isinstance(a, DualQuaternion) and isinstance(b, DualQuaternion):
        c = 0.5 * (dqmul(a.vec8(), b.vec8()) - dqmul(b.vec8(), a.vec8()))
        return DualQuaternion.from_vec8(c)
    if isinstance(a, Quaternion) and isinstance(b, Quaternion):
        c = 0.5 * (qmul(a.vec4(), b.vec4()) - qmul(b.vec4(), a.vec4()))
        return PureQuaternion.from_vec3(c[1:])
    raise TypeError("pure_cross expects two quaternions or two dual quaternions")
