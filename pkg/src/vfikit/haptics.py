"""Master-side Cartesian impedance forces.

The masters feel two virtual springs plus a viscous damper: a tracking
spring on each robot's own slave error and a shared guidance spring on the
tip-to-guidance-cylinder error, applied with opposite signs on the two
masters so that they jointly squeeze the tip onto the guidance surface:

    F1 = -eta_f*gamma*e1 - eta_f*(1-gamma)*e_guide - eta_v*v1
    F2 = -eta_f*gamma*e2 + eta_f*(1-gamma)*e_guide - eta_v*v2

All errors are expressed in the master (camera) frame via a fixed view
rotation; the forces are computed and logged, never rendered to hardware.
"""

from dataclasses import dataclass, field

import numpy as np

from .geometry import Cylinder, closest_point_on_cylinder
from .quatalg import rotate_vec


@dataclass(frozen=True)
class ImpedanceParams:
    eta_f: float = 50.0   # stiffness, N/m
    eta_v: float = 0.5    # viscosity, N*s/m
    gamma: float = 0.01   # tracking-vs-guidance priority
    view_rotation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0, 0, 0]))

    def __post_init__(self):
        if self.eta_f <= 0.0:
            raise ValueError("stiffness eta_f must be positive")
        if self.eta_v < 0.0:
            raise ValueError("viscosity eta_v must be non-negative")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must be in [0, 1]")
        r = np.asarray(self.view_rotation, dtype=float)
        if abs(np.linalg.norm(r) - 1.0) > 1e-6:
            raise ValueError("view rotation must be a unit quaternion")
        r.setflags(write=False)
        object.__setattr__(self, "view_rotation", r)


@dataclass
class MasterState:
    """Slave-side errors and master velocities feeding the impedance law."""

    t_err_1: np.ndarray
    t_err_2: np.ndarray
    t_err_guide: np.ndarray
    v_master_1: np.ndarray
    v_master_2: np.ndarray

    def __post_init__(self):
        for name in ("t_err_1", "t_err_2", "t_err_guide", "v_master_1", "v_master_2"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be a finite 3-vector")
            setattr(self, name, v)


def guidance_translation_error(guide: Cylinder, t2) -> tuple[np.ndarray, bool]:
    """Tip error t2 - t_c to the closest point t_c on the guidance cylinder.

    Returns the error and the axis-degeneracy flag from the closest-point
    computation; on degeneracy the caller should substitute its previous
    radial direction.
    """
    t2 = np.asarray(t2, dtype=float) if not hasattr(t2, "vec3") else t2.vec3()
    t_c, degenerate = closest_point_on_cylinder(guide, t2)
    return t2 - t_c, degenerate


def master_forces(state: MasterState, params: ImpedanceParams) -> tuple[np.ndarray, np.ndarray]:
    """Total impedance force on each master, in the master frame."""
    rv = params.view_rotation
    e1 = rotate_vec(rv, state.t_err_1)
    e2 = rotate_vec(rv, state.t_err_2)
    eg = rotate_vec(rv, state.t_err_guide)
    spring = params.eta_f
    track = spring * params.gamma
    guide = spring * (1.0 - params.gamma)
    f1 = -track * e1 - guide * eg - params.eta_v * state.v_master_1
    f2 = -track * e2 + guide * eg - params.eta_v * state.v_master_2
    return f1, f2
