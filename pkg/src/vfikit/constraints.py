"""Vector-field-inequality rows: distance Jacobians and zone constraints.

Every constraint is a linear inequality ``coeffs @ qd <= bound`` over the
stacked joint velocity ``qd = [qd1; qd2]``.  Restricted zones keep a signed
distance above its safe value, safe zones keep it below:

* restricted: ``-J_d qd <= eta*(d - d_safe) + zeta_safe``
* safe:       ``+J_d qd <= eta*(d_safe - d) - zeta_safe``

where ``zeta_safe = zeta - d_safe_rate`` carries the part of the distance
rate not caused by joint motion (moving primitives) and the safe-distance
drift.  For fixtures rigidly attached to a robot the joint Jacobian already
captures the fixture motion, so their residual is zero.

Distance conventions follow the geometric primitives: point/line and
line/line zones use squared distances (and squared safe distances), planes
use the signed distance.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import PARALLEL_TOL, line_line_distance, point_line_sq_distance
from .kinematics import KinState, _skew

RowTag = str  # joint_limit | rcm | shaft_shaft | lvf_cylinder | lvf_plane_min | lvf_plane_max | plane


@dataclass(frozen=True)
class VfiRow:
    """One inequality row coeffs @ qd <= bound over the stacked velocities."""

    coeffs: np.ndarray
    bound: float
    tag: RowTag

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if not np.all(np.isfinite(c)) or not np.isfinite(self.bound):
            raise ValueError(f"non-finite constraint row (tag={self.tag})")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)


@dataclass
class ConstraintSet:
    """Ordered stack of VFI rows with its assembled (W, w) system."""

    rows: list[VfiRow] = field(default_factory=list)

    def add(self, *rows: VfiRow) -> None:
        self.rows.extend(rows)

    def extend(self, rows) -> None:
        self.rows.extend(rows)

    @property
    def w_matrix(self) -> np.ndarray:
        if not self.rows:
            return np.zeros((0, 0))
        return np.vstack([r.coeffs for r in self.rows])

    @property
    def w_vector(self) -> np.ndarray:
        return np.array([r.bound for r in self.rows])

    def margins(self, qd: np.ndarray) -> np.ndarray:
        """Slack w - W@qd of every row; negative entries are violations."""
        if not self.rows:
            return np.zeros(0)
        return self.w_vector - self.w_matrix @ qd

    def min_margin_by_tag(self, qd: np.ndarray) -> dict[str, float]:
        out: dict[str, float] = {}
        for row, margin in zip(self.rows, self.margins(qd)):
            out[row.tag] = min(out.get(row.tag, np.inf), float(margin))
        return out


@dataclass(frozen=True)
class ZoneSpec:
    """Zone kind, gain and (possibly time-varying) safe distance."""

    kind: str  # "restricted" | "safe"
    eta: float
    d_safe: float | Callable[[float], float] = 0.0
    d_safe_rate: float | Callable[[float], float] = 0.0

    def __post_init__(self):
        if self.kind not in ("restricted", "safe"):
            raise ValueError(f"unknown zone kind {self.kind!r}")
        if self.eta < 0.0:
            raise ValueError("zone gain must be non-negative")

    def safe_distance(self, t: float) -> float:
        return self.d_safe(t) if callable(self.d_safe) else self.d_safe

    def safe_distance_rate(self, t: float) -> float:
        return self.d_safe_rate(t) if callable(self.d_safe_rate) else self.d_safe_rate


def vfi_row(
    jac: np.ndarray,
    d: float,
    zone: ZoneSpec,
    t: float = 0.0,
    residual: float = 0.0,
    tag: RowTag = "zone",
) -> VfiRow:
    """Build one restricted/safe zone row from a stacked distance Jacobian.

    ``residual`` is the distance rate not explained by joint motion; together
    with the safe-distance rate it forms the feed-forward term.
    """
    zeta_safe = residual - zone.safe_distance_rate(t)
    d_safe = zone.safe_distance(t)
    if zone.kind == "restricted":
        return VfiRow(-jac, zone.eta * (d - d_safe) + zeta_safe, tag)
    return VfiRow(jac, zone.eta * (d_safe - d) - zeta_safe, tag)


def stack_blocks(n1: int, n2: int, block1: np.ndarray | None, block2: np.ndarray | None) -> np.ndarray:
    """Assemble a stacked 1x(n1+n2) row from per-robot blocks (None = zeros)."""
    row = np.zeros(n1 + n2)
    if block1 is not None:
        row[:n1] = block1
    if block2 is not None:
        row[n1:] = block2
    return row


# ---------------------------------------------------------------------------
# distance Jacobians
# ---------------------------------------------------------------------------

def point_line_distance_jacobians(line_state: KinState, point_state: KinState):
    """Squared distance between one robot's shaft line and the other's tip.

    Returns ``(J_line_block, J_point_block, D)`` so that
    ``dD/dt = J_line_block @ qd_line + J_point_block @ qd_point``.
    """
    l = line_state.line.direction
    m = line_state.line.moment
    p = point_state.t
    e = np.cross(p, l) - m
    d_sq = float(e @ e)
    jac_dir = line_state.jac_line[1:4]
    jac_mom = line_state.jac_line[5:8]
    j_line = 2.0 * e @ (_skew(p) @ jac_dir - jac_mom)
    j_point = 2.0 * e @ (-_skew(l) @ point_state.jac_t)
    return j_line, j_point, d_sq


def point_plane_distance_jacobians(
    plane_state: KinState, point_state: KinState, offset: float
):
    """Signed distance from a tip to a plane carried by the other robot.

    The plane has normal along the carrier's shaft direction and passes
    ``offset`` meters from the carrier tooltip along that normal.  Returns
    ``(J_plane_block, J_point_block, f)``.
    """
    n = plane_state.line.direction
    rel = point_state.t - plane_state.t
    f = float(rel @ n) - offset
    jac_n = plane_state.jac_line[1:4]
    j_plane = rel @ jac_n - n @ plane_state.jac_t
    j_point = n @ point_state.jac_t
    return j_plane, j_point, f


def line_line_sq_distance_jacobians(state1: KinState, state2: KinState):
    """Squared distance between the two shaft lines with both Jacobian blocks.

    Returns ``(J1, J2, D, parallel)``.  The parallel branch measures the
    perpendicular offset through one line's anchor point; the generic branch
    uses the reciprocal-product formula D = s^2 / |l1 x l2|^2.
    """
    l1, m1 = state1.line.direction, state1.line.moment
    l2, m2 = state2.line.direction, state2.line.moment
    jd1, jm1 = state1.jac_line[1:4], state1.jac_line[5:8]
    jd2, jm2 = state2.jac_line[1:4], state2.jac_line[5:8]

    c = np.cross(l1, l2)
    cn2 = float(c @ c)
    if cn2 < PARALLEL_TOL**2:
        # parallel shafts: distance via the point of line 2 closest to origin
        p2 = np.cross(l2, m2)
        e = np.cross(p2, l1) - m1
        d_sq = float(e @ e)
        j1 = 2.0 * e @ (_skew(p2) @ jd1 - jm1)
        jac_p2 = -_skew(m2) @ jd2 + _skew(l2) @ jm2
        j2 = 2.0 * e @ (-_skew(l1) @ jac_p2)
        return j1, j2, d_sq, True

    s = float(l1 @ m2 + l2 @ m1)
    d_sq = s * s / cn2
    # gradients of D wrt the Pluecker components
    k1 = 2.0 * s / cn2
    k2 = 2.0 * s * s / (cn2 * cn2)
    g_l1 = k1 * m2 - k2 * np.cross(l2, c)
    g_m1 = k1 * l2
    g_l2 = k1 * m1 + k2 * np.cross(l1, c)
    g_m2 = k1 * l1
    j1 = g_l1 @ jd1 + g_m1 @ jm1
    j2 = g_l2 @ jd2 + g_m2 @ jm2
    return j1, j2, d_sq, False


# ---------------------------------------------------------------------------
# constraint builders
# ---------------------------------------------------------------------------

def rcm_constraint(
    state: KinState,
    p_rcm: np.ndarray,
    d_safe_sq: float,
    eta: float,
    robot_index: int,
    n1: int,
    n2: int,
) -> VfiRow:
    """Entry-sphere row keeping the shaft line within a sphere around p_rcm.

    Safe zone on the squared point-to-line distance with squared radius
    ``d_safe_sq``.
    """
    if d_safe_sq <= 0.0:
        raise ValueError("entry sphere squared radius must be positive")
    p = np.asarray(p_rcm, dtype=float)
    l, m = state.line.direction, state.line.moment
    e = np.cross(p, l) - m
    d_sq = float(e @ e)
    jac = 2.0 * e @ (_skew(p) @ state.jac_line[1:4] - state.jac_line[5:8])
    row = stack_blocks(n1, n2, jac if robot_index == 0 else None,
                       jac if robot_index == 1 else None)
    zone = ZoneSpec("safe", eta, d_safe_sq)
    return vfi_row(row, d_sq, zone, tag="rcm")


def rcm_sq_distance(state: KinState, p_rcm: np.ndarray) -> float:
    return point_line_sq_distance(state.line, np.asarray(p_rcm, dtype=float))


def shaft_shaft_constraint(
    state1: KinState, state2: KinState, r_min: float, eta: float
) -> VfiRow:
    """Restricted zone on the squared line-line distance, safe value r_min^2."""
    if r_min <= 0.0:
        raise ValueError("shaft clearance r_min must be positive")
    j1, j2, d_sq, _parallel = line_line_sq_distance_jacobians(state1, state2)
    n1, n2 = state1.jac_t.shape[1], state2.jac_t.shape[1]
    row = stack_blocks(n1, n2, j1, j2)
    zone = ZoneSpec("restricted", eta, r_min * r_min)
    return vfi_row(row, d_sq, zone, tag="shaft_shaft")


@dataclass(frozen=True)
class LvfParams:
    """Looping-envelope geometry: cylinder radius, axial band, shaft clearance."""

    r_max: float
    d_pi_min: float
    d_pi_max: float
    r_min: float

    def __post_init__(self):
        if self.r_max <= 0.0:
            raise ValueError("LVF cylinder radius must be positive")
        if not self.d_pi_min < self.d_pi_max:
            raise ValueError("LVF band requires d_pi_min < d_pi_max")


def lvf_constraints(
    state1: KinState, state2: KinState, params: LvfParams, eta: float
) -> list[VfiRow]:
    """Looping virtual fixture stack: shaft clearance plus tip envelope.

    The envelope is attached to robot 1: a cylinder of radius ``r_max``
    around its shaft line and an axial band ``[d_pi_min, d_pi_max]`` measured
    from its tooltip along the shaft direction.  All rows constrain both
    robots because the fixture moves with robot 1.
    """
    n1, n2 = state1.jac_t.shape[1], state2.jac_t.shape[1]
    rows = [shaft_shaft_constraint(state1, state2, params.r_min, eta)]

    j1, j2, d_sq = point_line_distance_jacobians(state1, state2)
    rows.append(vfi_row(
        stack_blocks(n1, n2, j1, j2), d_sq,
        ZoneSpec("safe", eta, params.r_max**2), tag="lvf_cylinder",
    ))

    # band planes are built with their offsets included, so both rows keep a
    # plain sign constraint on the signed distance (safe value zero)
    j1, j2, f_min = point_plane_distance_jacobians(state1, state2, params.d_pi_min)
    rows.append(vfi_row(
        stack_blocks(n1, n2, j1, j2), f_min,
        ZoneSpec("restricted", eta, 0.0), tag="lvf_plane_min",
    ))

    j1, j2, f_max = point_plane_distance_jacobians(state1, state2, params.d_pi_max)
    rows.append(vfi_row(
        stack_blocks(n1, n2, j1, j2), f_max,
        ZoneSpec("safe", eta, 0.0), tag="lvf_plane_max",
    ))
    return rows


def joint_limit_constraints(
    q: np.ndarray,
    q_min: np.ndarray,
    q_max: np.ndarray,
    eta: float,
    robot_index: int,
    n1: int,
    n2: int,
) -> list[VfiRow]:
    """Velocity-damper rows +-qd_j <= eta * remaining range per joint."""
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    offset = 0 if robot_index == 0 else n1
    rows = []
    for j in range(n):
        upper = np.zeros(n1 + n2)
        upper[offset + j] = 1.0
        rows.append(VfiRow(upper, eta * (q_max[j] - q[j]), "joint_limit"))
        lower = np.zeros(n1 + n2)
        lower[offset + j] = -1.0
        rows.append(VfiRow(lower, eta * (q[j] - q_min[j]), "joint_limit"))
    return rows
