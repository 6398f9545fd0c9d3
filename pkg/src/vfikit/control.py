"""Constrained differential-kinematics controller for two teleoperated arms.

Each control step assembles a strictly convex QP over the stacked joint
velocities ``qd = [qd1; qd2]``:

* baseline mode:  ``min beta*F1 + (1-beta)*F2`` where
  ``Fi = alpha*|Jt qd + eta*t_err|^2 + (1-alpha)*|Jr qd + eta*r_err|^2
  + |lam*qd_i|^2``
* proposed mode:  ``min gamma*(T1+T2) + (1-gamma)*(G1+G2) + damping`` where
  ``Ti`` is the tracking part of ``Fi`` (no damping), ``Gi`` are squared
  guidance residuals driving the tip of robot 2 onto the guidance cylinder
  around robot 1's shaft, and the damping term is kept unweighted.

subject to the joint-limit, entry-sphere, shaft-clearance and looping
envelope rows stacked by the active fixture set.
"""

from dataclasses import dataclass, field

import numpy as np

from .constraints import (
    ConstraintSet,
    LvfParams,
    joint_limit_constraints,
    lvf_constraints,
    point_line_distance_jacobians,
    point_plane_distance_jacobians,
    rcm_constraint,
    rcm_sq_distance,
    shaft_shaft_constraint,
)
from .geometry import line_line_distance
from .kinematics import KinState, RobotModel, kinematic_state
from .qpsolver import QpProblem, QpSolution, solve_qp


@dataclass(frozen=True)
class ControllerParams:
    """Objective weights and gains; defaults are the reference tuning."""

    alpha: float = 0.999
    beta: float = 0.6
    gamma: float = 0.01
    eta: float = 150.0
    eta_d: float = 30.0
    eta_rcm: float = 30.0
    eta_guide: float = 1.0
    lam: float = 0.02
    mode: str = "baseline"  # "baseline" | "proposed"
    qp_tolerance: float = 1e-8

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v!r}")
        if self.lam <= 0.0:
            raise ValueError("damping lam must be positive for a strictly convex QP")
        if self.mode == "baseline" and not 0.0 < self.beta < 1.0:
            # the damping of each robot is beta-weighted in baseline mode, so
            # the extremes would make the Hessian singular
            raise ValueError("baseline mode requires beta strictly inside (0, 1)")
        if self.mode not in ("baseline", "proposed"):
            raise ValueError(f"unknown controller mode {self.mode!r}")
        for name in ("eta", "eta_d", "eta_rcm", "eta_guide"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class FixtureParams:
    """Virtual fixture geometry in meters."""

    r_min: float = 3.5e-3
    r_max: float = 20.0e-3
    r_guide: float = 10.0e-3
    d_safe_rcm: float = 2.5e-3  # entry sphere radius
    d_pi_min: float = -8.0e-3
    d_pi_max: float = 10.0e-3

    def lvf(self) -> LvfParams:
        return LvfParams(self.r_max, self.d_pi_min, self.d_pi_max, self.r_min)


@dataclass(frozen=True)
class ActiveFixtures:
    """Which constraint groups and objectives a scenario enables."""

    joint_limits: bool = True
    rcm: bool = True
    shaft_shaft: bool = False
    lvf: bool = False
    tgc: bool = False


@dataclass
class TrackingTarget:
    """Desired tooltip position [m] and tool rotation for one robot."""

    t_d: np.ndarray
    r_d: np.ndarray

    def __post_init__(self):
        self.t_d = np.asarray(self.t_d, dtype=float)
        self.r_d = np.asarray(self.r_d, dtype=float)
        n = np.linalg.norm(self.r_d)
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"target rotation must be a unit quaternion (norm {n!r})")
        self.r_d = self.r_d / n


def rotation_error(r: np.ndarray, r_d: np.ndarray) -> np.ndarray:
    """Switching rotation error vec4(r - s*r_d), s = sign(<r, r_d>).

    The sign switch makes the error invariant under the quaternion double
    cover; a tie resolves to +1 for determinism.
    """
    s = 1.0 if float(r @ r_d) >= 0.0 else -1.0
    return r - s * r_d


def _accumulate_tracking(
    h: np.ndarray,
    f: np.ndarray,
    state: KinState,
    target: TrackingTarget,
    params: ControllerParams,
    weight: float,
    damping_weight: float,
    sl: slice,
) -> None:
    jt, jr = state.jac_t, state.jac_r
    t_err = state.t - target.t_d
    r_err = rotation_error(state.r, target.r_d)
    h[sl, sl] += 2.0 * weight * (
        params.alpha * jt.T @ jt + (1.0 - params.alpha) * jr.T @ jr
    )
    h[sl, sl] += 2.0 * damping_weight * params.lam**2 * np.eye(jt.shape[1])
    f[sl] += 2.0 * weight * params.eta * (
        params.alpha * jt.T @ t_err + (1.0 - params.alpha) * jr.T @ r_err
    )


def build_tracking_objective(
    states: tuple[KinState, KinState],
    targets: tuple[TrackingTarget, TrackingTarget],
    params: ControllerParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic (H, f) of the tracking + damping objective for both robots."""
    n1 = states[0].jac_t.shape[1]
    n2 = states[1].jac_t.shape[1]
    h = np.zeros((n1 + n2, n1 + n2))
    f = np.zeros(n1 + n2)
    slices = (slice(0, n1), slice(n1, n1 + n2))
    if params.mode == "baseline":
        weights = (params.beta, 1.0 - params.beta)
        damping = weights
    else:
        weights = (params.gamma, params.gamma)
        damping = (1.0, 1.0)
    for state, target, w, dw, sl in zip(states, targets, weights, damping, slices):
        _accumulate_tracking(h, f, state, target, params, w, dw, sl)
    return h, f


def build_guidance_objective(
    states: tuple[KinState, KinState],
    params: ControllerParams,
    r_guide: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic (H, f) of the guidance-cylinder terms, weighted by 1-gamma.

    Each robot gets a squared residual ``|J_block qd + eta_guide*D_err|^2``
    on the squared tip-to-axis distance error ``D_err = D - r_guide^2``,
    pulling the tip of robot 2 onto the cylinder surface around robot 1's
    shaft.
    """
    n1 = states[0].jac_t.shape[1]
    n2 = states[1].jac_t.shape[1]
    h = np.zeros((n1 + n2, n1 + n2))
    f = np.zeros(n1 + n2)
    j1, j2, d_sq = point_line_distance_jacobians(states[0], states[1])
    d_err = d_sq - r_guide**2
    w = 2.0 * (1.0 - params.gamma)
    h[:n1, :n1] += w * np.outer(j1, j1)
    f[:n1] += w * params.eta_guide * d_err * j1
    h[n1:, n1:] += w * np.outer(j2, j2)
    f[n1:] += w * params.eta_guide * d_err * j2
    return h, f


@dataclass
class ControlOutput:
    qd: np.ndarray
    feasible: bool
    states: tuple[KinState, KinState]
    constraints: ConstraintSet
    solution: QpSolution
    diagnostics: dict[str, float] = field(default_factory=dict)


def control_step(
    model1: RobotModel,
    model2: RobotModel,
    q1: np.ndarray,
    q2: np.ndarray,
    target1: TrackingTarget,
    target2: TrackingTarget,
    params: ControllerParams,
    fixtures: FixtureParams,
    active: ActiveFixtures = ActiveFixtures(),
    p_rcm1: np.ndarray | None = None,
    p_rcm2: np.ndarray | None = None,
    extra_rows=None,
) -> ControlOutput:
    """One control cycle: assemble objective and constraints, solve the QP.

    ``extra_rows`` may be a callable ``(state1, state2) -> list[VfiRow]`` for
    scenario-specific constraints (e.g. a scripted moving plane).  On an
    infeasible QP the command is zeroed and flagged instead of raising, which
    is the safe behavior inside a running teleoperation loop.
    """
    state1 = kinematic_state(model1, q1)
    state2 = kinematic_state(model2, q2)
    states = (state1, state2)
    n1, n2 = model1.dof, model2.dof

    h, f = build_tracking_objective(states, (target1, target2), params)
    use_tgc = active.tgc and params.mode == "proposed"
    if use_tgc:
        hg, fg = build_guidance_objective(states, params, fixtures.r_guide)
        h += hg
        f += fg

    cset = ConstraintSet()
    if active.joint_limits:
        cset.extend(joint_limit_constraints(q1, model1.q_min, model1.q_max,
                                            params.eta_d, 0, n1, n2))
        cset.extend(joint_limit_constraints(q2, model2.q_min, model2.q_max,
                                            params.eta_d, 1, n1, n2))
    if active.rcm:
        d_safe_sq = fixtures.d_safe_rcm**2
        if p_rcm1 is not None:
            cset.add(rcm_constraint(state1, p_rcm1, d_safe_sq, params.eta_rcm, 0, n1, n2))
        if p_rcm2 is not None:
            cset.add(rcm_constraint(state2, p_rcm2, d_safe_sq, params.eta_rcm, 1, n1, n2))
    if active.lvf:
        cset.extend(lvf_constraints(state1, state2, fixtures.lvf(), params.eta_d))
    elif active.shaft_shaft:
        cset.add(shaft_shaft_constraint(state1, state2, fixtures.r_min, params.eta_d))
    if extra_rows is not None:
        cset.extend(extra_rows(state1, state2))

    problem = QpProblem(h, f, cset.w_matrix, cset.w_vector)
    solution = solve_qp(problem)
    qd = solution.x if solution.feasible else np.zeros(n1 + n2)

    diag = _diagnostics(states, fixtures, p_rcm1, p_rcm2)
    diag["infeasible"] = 0.0 if solution.feasible else 1.0
    return ControlOutput(qd, solution.feasible, states, cset, solution, diag)


def _diagnostics(states, fixtures: FixtureParams, p_rcm1, p_rcm2) -> dict[str, float]:
    state1, state2 = states
    _, _, d_cyl_sq = point_line_distance_jacobians(state1, state2)
    _, _, f_min = point_plane_distance_jacobians(state1, state2, fixtures.d_pi_min)
    _, _, f_max = point_plane_distance_jacobians(state1, state2, fixtures.d_pi_max)
    diag = {
        "shaft_distance": line_line_distance(state1.line, state2.line),
        "tip_axis_sq_distance": d_cyl_sq,
        "guidance_error": abs(np.sqrt(d_cyl_sq) - fixtures.r_guide),
        "plane_min_distance": f_min,
        "plane_max_distance": f_max,
        "rcm1_sq_distance": rcm_sq_distance(state1, p_rcm1) if p_rcm1 is not None else 0.0,
        "rcm2_sq_distance": rcm_sq_distance(state2, p_rcm2) if p_rcm2 is not None else 0.0,
    }
    return diag


def table_defaults() -> tuple[ControllerParams, FixtureParams]:
    """Reference control and fixture parameter set (lengths in meters)."""
    return ControllerParams(), FixtureParams()
