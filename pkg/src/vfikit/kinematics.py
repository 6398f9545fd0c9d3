"""Serial-chain forward and differential kinematics on dual quaternions.

Robots are modeled as revolute chains in standard Denavit-Hartenberg
convention (Rz(theta) Tz(d) Tx(a) Rx(alpha) per joint), with an optional base
pose and effector offset pose.  The instrument shaft is the effector z-axis
and the tooltip is the effector frame origin.

Internally all lengths are meters and all angles radians; robot model files
use millimeters and degrees and are converted on load.
"""

import json
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

from .geometry import PluckerLine
from .quatalg import (
    C4,
    UnitDualQuaternion,
    dq_normalize,
    dqconj,
    dqmul,
    hamilton_minus4,
    hamilton_plus4,
    pose_from_rt,
    pose_rotation,
    pose_translation,
    qconj,
    qmul,
    rotate_vec,
)

Z_AXIS = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class DHJoint:
    """One revolute joint: theta offset [rad], d [m], a [m], alpha [rad]."""

    theta: float
    d: float
    a: float
    alpha: float


@dataclass(frozen=True)
class RobotModel:
    name: str
    joints: tuple[DHJoint, ...]
    base: np.ndarray = field(default_factory=lambda: _identity_pose())
    effector: np.ndarray = field(default_factory=lambda: _identity_pose())
    q_min: np.ndarray = field(default_factory=lambda: np.array([]))
    q_max: np.ndarray = field(default_factory=lambda: np.array([]))

    def __post_init__(self):
        n = len(self.joints)
        q_min = np.asarray(self.q_min, dtype=float)
        q_max = np.asarray(self.q_max, dtype=float)
        if q_min.size == 0:
            q_min = np.full(n, -np.pi)
        if q_max.size == 0:
            q_max = np.full(n, np.pi)
        if q_min.shape != (n,) or q_max.shape != (n,):
            raise ValueError("joint limit vectors must match the joint count")
        if not np.all(q_min < q_max):
            raise ValueError("q_min must be elementwise below q_max")
        base = dq_normalize(np.asarray(self.base, dtype=float))
        eff = dq_normalize(np.asarray(self.effector, dtype=float))
        for arr in (q_min, q_max, base, eff):
            arr.setflags(write=False)
        object.__setattr__(self, "q_min", q_min)
        object.__setattr__(self, "q_max", q_max)
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "effector", eff)

    @property
    def dof(self) -> int:
        return len(self.joints)

    def with_base(self, base: np.ndarray) -> "RobotModel":
        return replace(self, base=np.asarray(base, dtype=float))

    def check_q(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dof,):
            raise ValueError(f"expected {self.dof} joint values, got shape {q.shape}")
        return q


@dataclass
class JointState:
    """Joint configuration and (optional) velocity of one robot."""

    q: np.ndarray
    qd: np.ndarray | None = None

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        if self.qd is None:
            self.qd = np.zeros_like(self.q)
        else:
            self.qd = np.asarray(self.qd, dtype=float)


def _identity_pose() -> np.ndarray:
    return np.array([1.0, 0, 0, 0, 0, 0, 0, 0])


def dh_transform(joint: DHJoint, q: float) -> np.ndarray:
    """Unit dual quaternion of one DH joint at angle ``q``."""
    theta = joint.theta + q
    ct, st = np.cos(0.5 * theta), np.sin(0.5 * theta)
    ca, sa = np.cos(0.5 * joint.alpha), np.sin(0.5 * joint.alpha)
    # r = rz(theta) * rx(alpha)
    r = np.array([ct * ca, ct * sa, st * sa, st * ca])
    cth, sth = np.cos(theta), np.sin(theta)
    t = np.array([joint.a * cth, joint.a * sth, joint.d])
    return pose_from_rt(r, t)


def _prefix_poses(model: RobotModel, q: np.ndarray) -> list[np.ndarray]:
    """Poses of base, base*x1, ..., base*x1..xn (length dof+1), plus effector."""
    poses = [model.base]
    x = model.base
    for joint, qj in zip(model.joints, q):
        x = dqmul(x, dh_transform(joint, qj))
        poses.append(x)
    return poses


def forward_kinematics(model: RobotModel, q) -> UnitDualQuaternion:
    """Tool pose base * chain(q) * effector as a unit dual quaternion."""
    return UnitDualQuaternion.from_vec8(fk_raw(model, model.check_q(q)))


def fk_raw(model: RobotModel, q: np.ndarray) -> np.ndarray:
    x = _prefix_poses(model, q)[-1]
    return dq_normalize(dqmul(x, model.effector))


def pose_jacobian(model: RobotModel, q) -> np.ndarray:
    """8 x dof Jacobian with vec8(dx/dt) = J @ qd."""
    return kinematic_state(model, q).jac_pose


@dataclass
class KinState:
    """Forward kinematics of one robot with the Jacobians used by the controller."""

    x: np.ndarray          # (8,) tool pose
    r: np.ndarray          # (4,) tool rotation
    t: np.ndarray          # (3,) tooltip position
    jac_pose: np.ndarray   # (8, n)
    jac_r: np.ndarray      # (4, n) rotation-quaternion rate
    jac_t: np.ndarray      # (3, n) tooltip velocity
    line: PluckerLine      # shaft line along the tool z-axis
    jac_line: np.ndarray   # (8, n) [vec4 direction rate; vec4 moment rate]


def kinematic_state(model: RobotModel, q) -> KinState:
    """Compute pose and all Jacobians for one configuration."""
    q = model.check_q(q)
    n = model.dof
    prefixes = _prefix_poses(model, q)
    x = dq_normalize(dqmul(prefixes[-1], model.effector))

    jac_pose = np.empty((8, n))
    for j in range(n):
        p = prefixes[j]
        rp = p[:4]
        axis = rotate_vec(rp, Z_AXIS)
        tp = pose_translation(p)
        line = np.concatenate([[0.0], axis, [0.0], np.cross(tp, axis)])
        jac_pose[:, j] = 0.5 * dqmul(line, x)

    r = x[:4]
    t = pose_translation(x)
    jac_r = jac_pose[:4]
    jac_d = jac_pose[4:]
    # t = 2 * dual * conj(primary)
    jac_t4 = 2.0 * (hamilton_minus4(qconj(r)) @ jac_d + hamilton_plus4(x[4:]) @ C4 @ jac_r)
    jac_t = jac_t4[1:]

    # shaft line l = r k r*, m = t x l
    direction = rotate_vec(r, Z_AXIS)
    moment = np.cross(t, direction)
    a4 = np.array([0.0, 0.0, 0.0, 1.0])
    jac_dir4 = (hamilton_minus4(qmul(a4, qconj(r))) + hamilton_plus4(qmul(r, a4)) @ C4) @ jac_r
    jac_m3 = -_skew(direction) @ jac_t + _skew(t) @ jac_dir4[1:]
    jac_line = np.vstack([jac_dir4, np.zeros((1, n)), jac_m3])

    return KinState(
        x=x,
        r=r,
        t=t,
        jac_pose=jac_pose,
        jac_r=jac_r,
        jac_t=jac_t,
        line=PluckerLine(direction, moment),
        jac_line=jac_line,
    )


def translation_jacobian(state: KinState) -> np.ndarray:
    return state.jac_t


def rotation_jacobian(state: KinState) -> np.ndarray:
    return state.jac_r


def line_jacobian(state: KinState) -> np.ndarray:
    return state.jac_line


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def solve_ik(
    model: RobotModel,
    t_target: np.ndarray,
    r_target: np.ndarray,
    q0: np.ndarray,
    iterations: int = 400,
    gain: float = 0.6,
    damping: float = 1e-3,
) -> tuple[np.ndarray, float]:
    """Damped least-squares pose IK.  Deterministic; returns (q, position error).

    Used to place robots in scenario start configurations.  The rotation error
    uses the sign-switched quaternion difference, so either cover of the
    target rotation is accepted.
    """
    q = np.asarray(q0, dtype=float).copy()
    t_target = np.asarray(t_target, dtype=float)
    r_target = np.asarray(r_target, dtype=float)
    for _ in range(iterations):
        st = kinematic_state(model, q)
        s = 1.0 if st.r @ r_target >= 0.0 else -1.0
        err = np.concatenate([st.t - t_target, st.r - s * r_target])
        jac = np.vstack([st.jac_t, st.jac_r])
        h = jac.T @ jac + damping * np.eye(model.dof)
        q = q - gain * np.linalg.solve(h, jac.T @ err)
        q = np.clip(q, model.q_min + 1e-3, model.q_max - 1e-3)
    st = kinematic_state(model, q)
    return q, float(np.linalg.norm(st.t - t_target))


# ---------------------------------------------------------------------------
# model files
# ---------------------------------------------------------------------------

def load_robot_model(source) -> RobotModel:
    """Load a robot model from a JSON file path or an already-parsed dict.

    File units are millimeters and degrees; pose entries are unit dual
    quaternion coefficients with the translation expressed in millimeters.
    """
    if isinstance(source, (str,)) or hasattr(source, "read"):
        if hasattr(source, "read"):
            raw = json.load(source)
        else:
            with open(source) as fh:
                raw = json.load(fh)
    else:
        raw = source
    try:
        joints = tuple(
            DHJoint(
                theta=np.deg2rad(j["theta"]),
                d=j["d"] * 1e-3,
                a=j["a"] * 1e-3,
                alpha=np.deg2rad(j["alpha"]),
            )
            for j in raw["dh"]
        )
        model = RobotModel(
            name=raw["name"],
            joints=joints,
            base=_pose_from_file(raw.get("base_pose")),
            effector=_pose_from_file(raw.get("effector_pose")),
            q_min=np.deg2rad(np.asarray(raw["q_min"], dtype=float)),
            q_max=np.deg2rad(np.asarray(raw["q_max"], dtype=float)),
        )
    except KeyError as exc:
        raise ValueError(f"robot model is missing required field {exc}") from exc
    return model


def _pose_from_file(coeffs) -> np.ndarray:
    if coeffs is None:
        return _identity_pose()
    pose = np.asarray(coeffs, dtype=float)
    if pose.shape != (8,):
        raise ValueError("pose entries must have 8 coefficients")
    pose = pose.copy()
    pose[4:] *= 1e-3  # translation mm -> m scales the dual part linearly
    return dq_normalize(pose)


def default_robot_model() -> RobotModel:
    """Packaged six-revolute reference arm used by all benchmarks."""
    with resources.files("vfikit.data").joinpath("default_robot.json").open() as fh:
        return load_robot_model(fh)
