"""Dual-quaternion differential IK with vector-field-inequality fixtures."""

from .quatalg import (
    DualQuaternion,
    PureQuaternion,
    Quaternion,
    UnitDualQuaternion,
    UnitQuaternion,
    pure_cross,
    pure_inner,
)
from .geometry import (
    Cylinder,
    Plane,
    PluckerLine,
    closest_point_on_cylinder,
    line_from_pose,
    line_line_distance,
    plane_from_pose,
    point_line_sq_distance,
    point_plane_signed_distance,
)
from .kinematics import (
    DHJoint,
    JointState,
    KinState,
    RobotModel,
    default_robot_model,
    forward_kinematics,
    kinematic_state,
    load_robot_model,
    pose_jacobian,
    solve_ik,
)
from .constraints import (
    ConstraintSet,
    LvfParams,
    VfiRow,
    ZoneSpec,
    joint_limit_constraints,
    lvf_constraints,
    rcm_constraint,
    shaft_shaft_constraint,
    vfi_row,
)
from .qpsolver import QpProblem, QpSolution, kkt_residuals, solve_qp
from .control import (
    ActiveFixtures,
    ControllerParams,
    ControlOutput,
    FixtureParams,
    TrackingTarget,
    build_guidance_objective,
    build_tracking_objective,
    control_step,
    rotation_error,
)
from .haptics import (
    ImpedanceParams,
    MasterState,
    guidance_translation_error,
    master_forces,
)

__version__ = "0.1.0"
