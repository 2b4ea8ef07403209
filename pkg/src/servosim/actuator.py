"""Forward dynamics of a single PD position-controlled servo joint.

The motor torque follows a PD law with a powered-on minimum derivative gain.
Its accelerating component is capped by a speed-dependent ceiling (flat at low
speed, dropping linearly above a knee speed), its decelerating component by a
constant brake limit. Passive resistance is Coulomb plus viscous, amplified
by a fixed ratio when the gearbox is driven from the output side, and a
stiction deadband holds the joint at rest. Integration is fixed-step
semi-implicit Euler.

All values are SI: rad, rad/s, N*m, kg*m^2, s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from ._kernels import integrate_series
from .errors import ValidationError

# |qdot| at or below this counts as "at rest" for the stiction deadband
STICTION_QDOT_EPS = 1e-4

# fixed-step integrator accuracy ceiling
MAX_STEP_DT = 2e-3
DEFAULT_DT = 1e-3


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value}")
    return value


def _require_nonneg(name: str, value: float) -> float:
    value = _require_finite(name, value)
    if value < 0.0:
        raise ValidationError(f"{name} must be >= 0, got {value}")
    return value


@dataclass(frozen=True)
class ActuatorParams:
    """Dynamics parameters of one servo motor family.

    damping:              viscous resistance slope [N*m*s/rad]
    armature:             reflected rotor inertia [kg*m^2]
    friction_loss:        Coulomb friction torque [N*m]
    tau_max:              low-speed torque ceiling [N*m]
    qdot_tau_max:         speed where the ceiling starts dropping [rad/s]
    qdot_max:             speed at the end of the linear drop [rad/s]
    tau_at_qdot_max:      ceiling value at qdot_max [N*m]
    kd_min:               powered-on minimum derivative gain [N*m*s/rad]
    tau_brake:            constant deceleration torque limit [N*m]
    passive_active_ratio: back-drive resistance amplification (1/eta^2)
    kp_conversion:        divisor mapping unitless kp register values to
                          physical gains [1]
    """

    damping: float
    armature: float
    friction_loss: float
    tau_max: float
    qdot_tau_max: float
    qdot_max: float
    tau_at_qdot_max: float
    kd_min: float
    tau_brake: float
    passive_active_ratio: float = 3.0
    kp_conversion: float = 150.0

    def __post_init__(self):
        for name in (
            "damping",
            "armature",
            "friction_loss",
            "tau_max",
            "qdot_tau_max",
            "qdot_max",
            "tau_at_qdot_max",
            "kd_min",
            "tau_brake",
            "passive_active_ratio",
            "kp_conversion",
        ):
            object.__setattr__(self, name, _require_nonneg(name, getattr(self, name)))
        if not self.qdot_tau_max > 0.0:
            raise ValidationError("qdot_tau_max must be > 0")
        if not self.qdot_max > self.qdot_tau_max:
            raise ValidationError(
                f"qdot_max ({self.qdot_max}) must exceed qdot_tau_max "
                f"({self.qdot_tau_max})"
            )
        if self.tau_max < self.tau_at_qdot_max:
            raise ValidationError(
                f"tau_max ({self.tau_max}) must be >= tau_at_qdot_max "
                f"({self.tau_at_qdot_max})"
            )
        if self.tau_brake < self.tau_max:
            raise ValidationError(
                f"tau_brake ({self.tau_brake}) must be >= tau_max ({self.tau_max})"
            )
        if self.passive_active_ratio < 1.0:
            raise ValidationError("passive_active_ratio must be >= 1")
        if self.kp_conversion <= 0.0:
            raise ValidationError("kp_conversion must be > 0")


@dataclass(frozen=True)
class JointState:
    """Instantaneous joint kinematics: position [rad], velocity [rad/s], time [s]."""

    q: float
    qdot: float
    t: float = 0.0

    def __post_init__(self):
        for name in ("q", "qdot", "t"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))


@dataclass(frozen=True)
class ControlCommand:
    """PD setpoint and gains driving one joint.

    With ``powered=False`` the motor produces zero torque and the powered-on
    minimum derivative gain does not apply. With ``unitless_gains=True`` the
    proportional gain is a servo register value and is divided by the
    parameter set's ``kp_conversion`` before use; the derivative gain always
    passes through unchanged.
    """

    setpoint: float
    kp: float
    kd: float = 0.0
    powered: bool = True
    unitless_gains: bool = False

    def __post_init__(self):
        object.__setattr__(self, "setpoint", _require_finite("setpoint", self.setpoint))
        object.__setattr__(self, "kp", _require_nonneg("kp", self.kp))
        object.__setattr__(self, "kd", _require_nonneg("kd", self.kd))


@dataclass(frozen=True)
class LoadConfig:
    """External load seen by the joint.

    external_torque is either a constant [N*m] or a per-sample sequence
    aligned with the setpoint series. gravity_torque_amplitude adds a
    pendulum-style torque amplitude*sin(q); a negative amplitude gives the
    hanging (restoring) pendulum.
    """

    inertia: float = 0.0
    external_torque: Union[float, Sequence[float], np.ndarray] = 0.0
    gravity_torque_amplitude: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "inertia", _require_nonneg("inertia", self.inertia))
        object.__setattr__(
            self,
            "gravity_torque_amplitude",
            _require_finite("gravity_torque_amplitude", self.gravity_torque_amplitude),
        )

    def external_series(self, n: int) -> np.ndarray:
        """Resolve external_torque into one value per sample (length n)."""
        if np.isscalar(self.external_torque):
            value = _require_finite("external_torque", float(self.external_torque))
            return np.full(n, value)
        arr = np.asarray(self.external_torque, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] != n:
            raise ValidationError(
                f"external_torque series must have length {n}, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValidationError("external_torque series must be finite")
        return arr


@dataclass(frozen=True)
class Trace:
    """Uniformly sampled log of setpoint, position, and velocity.

    The optional tau column carries measured torque. ``comments`` holds
    free-form metadata lines carried through file round trips.
    """

    dt: float
    t: np.ndarray
    setpoint: np.ndarray
    q: np.ndarray
    qdot: np.ndarray
    tau: Optional[np.ndarray] = None
    comments: tuple = ()

    def __post_init__(self):
        dt = _require_finite("dt", self.dt)
        if dt <= 0.0:
            raise ValidationError(f"dt must be > 0, got {dt}")
        object.__setattr__(self, "dt", dt)
        for name in ("t", "setpoint", "q", "qdot"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 1:
                raise ValidationError(f"{name} must be 1-D")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite values")
            object.__setattr__(self, name, arr)
        n = self.t.shape[0]
        if n == 0:
            raise ValidationError("trace must contain at least one sample")
        for name in ("setpoint", "q", "qdot"):
            if getattr(self, name).shape[0] != n:
                raise ValidationError(f"{name} length differs from t")
        if self.tau is not None:
            tau = np.asarray(self.tau, dtype=np.float64)
            if tau.shape != (n,) or not np.all(np.isfinite(tau)):
                raise ValidationError("tau column malformed")
            object.__setattr__(self, "tau", tau)
        if n > 1:
            jitter = np.max(np.abs(np.diff(self.t) - self.dt))
            if jitter > 1e-9:
                raise ValidationError(
                    f"t is not uniformly spaced by dt={self.dt} (max jitter {jitter:.3e} s)"
                )
        object.__setattr__(self, "comments", tuple(str(c) for c in self.comments))

    def __len__(self) -> int:
        return self.t.shape[0]

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])


def pd_torque(state: JointState, cmd: ControlCommand, params: ActuatorParams) -> float:
    """Unclamped motor torque kp*(setpoint - q) - (kd_min + kd)*qdot.

    Returns 0 when the command is unpowered (kd_min does not apply then).
    """
    if not cmd.powered:
        return 0.0
    kp = cmd.kp / params.kp_conversion if cmd.unitless_gains else cmd.kp
    return kp * (cmd.setpoint - state.q) - (params.kd_min + cmd.kd) * state.qdot


def torque_limit(qdot, params: ActuatorParams):
    """Speed-dependent ceiling on accelerating torque.

    Flat at tau_max up to qdot_tau_max, linear down to tau_at_qdot_max at
    qdot_max, zero strictly above qdot_max. Even in qdot. Accepts scalars or
    arrays.
    """
    s = np.abs(np.asarray(qdot, dtype=np.float64))
    if not np.all(np.isfinite(s)):
        raise ValidationError("qdot must be finite")
    span = params.qdot_max - params.qdot_tau_max
    mid = params.tau_max + (params.tau_at_qdot_max - params.tau_max) * (
        (s - params.qdot_tau_max) / span
    )
    out = np.where(
        s <= params.qdot_tau_max,
        params.tau_max,
        np.where(s <= params.qdot_max, mid, 0.0),
    )
    if np.isscalar(qdot):
        return float(out)
    return out


def resistance_torque(
    qdot: float, params: ActuatorParams, backdriven: bool = False
) -> float:
    """Magnitude of passive resistance friction_loss + damping*|qdot|.

    Multiplied by the passive-active ratio when the joint is back-driven.
    Meaningful above the stiction threshold; at rest the deadband in
    :func:`step` applies instead.
    """
    qdot = _require_finite("qdot", qdot)
    mag = params.friction_loss + params.damping * abs(qdot)
    if backdriven:
        mag *= params.passive_active_ratio
    return mag


def net_torque(tau_m: float, qdot: float, params: ActuatorParams) -> float:
    """Clamp a motor torque to its speed-dependent bounds and subtract resistance.

    For qdot >= 0 the motor contribution is clamped to
    [-tau_brake, +torque_limit(qdot)], mirrored for qdot < 0; resistance then
    opposes the motion (none at rest). Resistance is unamplified here: the
    back-drive case needs load context that only the integrator has.
    """
    tau_m = _require_finite("tau_m", tau_m)
    qdot = _require_finite("qdot", qdot)
    ceiling = torque_limit(qdot, params)
    if qdot >= 0.0:
        lo, hi = -params.tau_brake, ceiling
    else:
        lo, hi = -ceiling, params.tau_brake
    clamped = min(max(tau_m, lo), hi)
    if qdot > 0.0:
        return clamped - resistance_torque(qdot, params)
    if qdot < 0.0:
        return clamped + resistance_torque(qdot, params)
    return clamped


def _check_dt(dt: float) -> float:
    dt = _require_finite("dt", dt)
    if dt <= 0.0:
        raise ValidationError(f"dt must be > 0, got {dt}")
    if dt > MAX_STEP_DT:
        raise ValidationError(f"dt must be <= {MAX_STEP_DT} s, got {dt}")
    return dt


def step(
    state: JointState,
    cmd: ControlCommand,
    load: LoadConfig,
    dt: float,
    params: ActuatorParams,
) -> JointState:
    """Advance one joint by one semi-implicit Euler step of length dt.

    Acceleration is (clamped motor torque + external + gravity - resistance)
    over (armature + load inertia). At rest (|qdot| <= STICTION_QDOT_EPS) the
    applied torque is deadbanded by friction_loss and the joint stays exactly
    still when it cannot break away. While moving, resistance is amplified by
    the passive-active ratio when the joint is back-driven: motor torque
    opposing the motion, or an unpowered joint driven by external torque.
    """
    dt = _check_dt(dt)
    inertia = params.armature + load.inertia
    if inertia <= 0.0:
        raise ValidationError("total inertia (armature + load) must be > 0")
    external = load.external_series(2)
    setpoints = np.array([cmd.setpoint, cmd.setpoint])
    kp = cmd.kp / params.kp_conversion if cmd.unitless_gains else cmd.kp
    q_out, v_out = integrate_series(
        setpoints,
        external,
        state.q,
        state.qdot,
        dt,
        kp,
        cmd.kd,
        cmd.powered,
        params.damping,
        params.armature,
        params.friction_loss,
        params.tau_max,
        params.qdot_tau_max,
        params.qdot_max,
        params.tau_at_qdot_max,
        params.kd_min,
        params.tau_brake,
        params.passive_active_ratio,
        load.inertia,
        load.gravity_torque_amplitude,
        STICTION_QDOT_EPS,
    )
    return JointState(q=float(q_out[1]), qdot=float(v_out[1]), t=state.t + dt)


def simulate_tracking(
    setpoints,
    dt: float,
    params: ActuatorParams,
    kp: float,
    kd: float = 0.0,
    load: LoadConfig = LoadConfig(),
    powered: bool = True,
    unitless_gains: bool = False,
    q0: Optional[float] = None,
    qdot0: float = 0.0,
    t0: float = 0.0,
) -> Trace:
    """Simulate PD tracking of a setpoint series; returns a Trace of equal length.

    The joint starts at q0 (default: the first setpoint) with velocity qdot0.
    Deterministic: identical inputs give bit-identical traces.
    """
    setpoints = np.asarray(setpoints, dtype=np.float64)
    if setpoints.ndim != 1 or setpoints.shape[0] == 0:
        raise ValidationError("setpoint series must be a non-empty 1-D array")
    if not np.all(np.isfinite(setpoints)):
        raise ValidationError("setpoint series must be finite")
    dt = _check_dt(dt)
    kp = _require_nonneg("kp", kp)
    kd = _require_nonneg("kd", kd)
    inertia = params.armature + load.inertia
    if inertia <= 0.0:
        raise ValidationError("total inertia (armature + load) must be > 0")
    if q0 is None:
        q0 = float(setpoints[0])
    q0 = _require_finite("q0", q0)
    qdot0 = _require_finite("qdot0", qdot0)
    n = setpoints.shape[0]
    external = load.external_series(n)
    kp_phys = kp / params.kp_conversion if unitless_gains else kp
    q_out, v_out = integrate_series(
        setpoints,
        external,
        q0,
        qdot0,
        dt,
        kp_phys,
        kd,
        powered,
        params.damping,
        params.armature,
        params.friction_loss,
        params.tau_max,
        params.qdot_tau_max,
        params.qdot_max,
        params.tau_at_qdot_max,
        params.kd_min,
        params.tau_brake,
        params.passive_active_ratio,
        load.inertia,
        load.gravity_torque_amplitude,
        STICTION_QDOT_EPS,
    )
    t = t0 + np.arange(n) * dt
    return Trace(dt=dt, t=t, setpoint=setpoints, q=q_out, qdot=v_out)
