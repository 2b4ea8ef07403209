"""Servo joint dynamics simulation, test-bed sysID, and humanoid gait metrics."""

from ._kernels import BACKEND
from .actuator import (
    DEFAULT_DT,
    MAX_STEP_DT,
    STICTION_QDOT_EPS,
    ActuatorParams,
    ControlCommand,
    JointState,
    LoadConfig,
    Trace,
    net_torque,
    pd_torque,
    resistance_torque,
    simulate_tracking,
    step,
    torque_limit,
)
from .errors import ValidationError
from .gait import (
    BalanceGains,
    ComTrajectory,
    FootStep,
    FootstepPlan,
    GaitPhase,
    ZmpReference,
    com_pd,
    com_trajectory,
    lipm_residual,
    phase_signal,
    plan_footsteps,
    reconstruct_zmp,
    support_distance,
    torso_pitch_pd,
    zmp_reference,
)
from .metrics import (
    GRAVITY,
    InventoryEntry,
    PowerFactorBreakdown,
    TorqueInventory,
    power_factor,
    power_factor_split,
    relative_deflection,
    scale_torque,
    torque_sum,
)
from .sysid import (
    FIT_PARAM_NAMES,
    FitConfig,
    FitResult,
    ParamBounds,
    default_bounds,
    fit_parameters,
    params_to_vector,
    tracking_error,
    vector_to_params,
)
from .testbed import (
    SENSOR_TORQUE_STD,
    BackdriveSample,
    ChirpSpec,
    FrictionDampingFit,
    SpindownTrace,
    default_backdrive_speeds,
    estimate_armature,
    fit_friction_damping,
    gen_chirp,
    run_backdrive,
    run_spindown,
)

__version__ = "0.1.0"

__all__ = [
    "ActuatorParams",
    "BACKEND",
    "BackdriveSample",
    "BalanceGains",
    "ChirpSpec",
    "ComTrajectory",
    "ControlCommand",
    "DEFAULT_DT",
    "FIT_PARAM_NAMES",
    "FitConfig",
    "FitResult",
    "FootStep",
    "FootstepPlan",
    "FrictionDampingFit",
    "GRAVITY",
    "GaitPhase",
    "InventoryEntry",
    "JointState",
    "LoadConfig",
    "MAX_STEP_DT",
    "ParamBounds",
    "PowerFactorBreakdown",
    "SENSOR_TORQUE_STD",
    "STICTION_QDOT_EPS",
    "SpindownTrace",
    "TorqueInventory",
    "Trace",
    "ValidationError",
    "ZmpReference",
    "com_pd",
    "com_trajectory",
    "default_backdrive_speeds",
    "default_bounds",
    "estimate_armature",
    "fit_friction_damping",
    "fit_parameters",
    "gen_chirp",
    "lipm_residual",
    "net_torque",
    "params_to_vector",
    "pd_torque",
    "phase_signal",
    "plan_footsteps",
    "power_factor",
    "power_factor_split",
    "reconstruct_zmp",
    "relative_deflection",
    "resistance_torque",
    "run_backdrive",
    "run_spindown",
    "scale_torque",
    "simulate_tracking",
    "step",
    "support_distance",
    "torque_limit",
    "torque_sum",
    "torso_pitch_pd",
    "tracking_error",
    "vector_to_params",
    "zmp_reference",
]
