"""Simulated motor test-bed experiments and their closed-form estimators.

Backdrive runs at constant speed recover Coulomb friction and viscous damping
from a line fit; unpowered spin-downs recover armature inertia from the
dissipated energy. A linear-sweep chirp generator provides the excitation
signal used for tracking-based identification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .actuator import (
    DEFAULT_DT,
    MAX_STEP_DT,
    STICTION_QDOT_EPS,
    ActuatorParams,
    LoadConfig,
    Trace,
    _require_finite,
    simulate_tracking,
)
from .errors import ValidationError

# torque sensor noise floor assumed for synthetic backdrive readings [N*m]
SENSOR_TORQUE_STD = 3e-4


@dataclass(frozen=True)
class ChirpSpec:
    """Linear frequency sweep: f0 -> f1 [Hz] over duration [s], sampled at dt."""

    f0: float
    f1: float
    amplitude: float
    duration: float
    dt: float
    offset: float = 0.0

    def __post_init__(self):
        for name in ("f0", "f1", "duration", "dt"):
            v = _require_finite(name, getattr(self, name))
            if v <= 0.0:
                raise ValidationError(f"{name} must be > 0, got {v}")
            object.__setattr__(self, name, v)
        object.__setattr__(
            self, "amplitude", _require_finite("amplitude", self.amplitude)
        )
        object.__setattr__(self, "offset", _require_finite("offset", self.offset))
        if max(self.f0, self.f1) * self.dt >= 0.5:
            raise ValidationError(
                f"sweep violates Nyquist: max frequency {max(self.f0, self.f1)} Hz "
                f"at dt={self.dt} s"
            )

    @property
    def num_samples(self) -> int:
        return int(round(self.duration / self.dt)) + 1

    def times(self) -> np.ndarray:
        return np.arange(self.num_samples) * self.dt


def gen_chirp(spec: ChirpSpec) -> np.ndarray:
    """Setpoint series offset + A*sin(2*pi*(f0*t + (f1-f0)*t^2/(2*T)))."""
    t = spec.times()
    phase = 2.0 * np.pi * (spec.f0 * t + (spec.f1 - spec.f0) * t * t / (2.0 * spec.duration))
    return spec.offset + spec.amplitude * np.sin(phase)


@dataclass(frozen=True)
class BackdriveSample:
    """One constant-speed backdrive measurement: speed [rad/s], resisting torque [N*m]."""

    omega: float
    tau_resist: float

    def __post_init__(self):
        omega = _require_finite("omega", self.omega)
        if omega <= 0.0:
            raise ValidationError(f"omega must be > 0, got {omega}")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(
            self, "tau_resist", _require_finite("tau_resist", self.tau_resist)
        )


def default_backdrive_speeds(params: ActuatorParams, n: int = 8) -> np.ndarray:
    """Log-spaced test speeds in [0.5, 0.9*qdot_max] rad/s."""
    if n < 2:
        raise ValidationError("need at least 2 test speeds")
    return np.geomspace(0.5, 0.9 * params.qdot_max, n)


def run_backdrive(
    params: ActuatorParams,
    omegas,
    noise_std: float = SENSOR_TORQUE_STD,
    seed=None,
) -> list[BackdriveSample]:
    """Powered-off resistance readings tau_f + d*omega with seeded sensor noise."""
    omegas = np.asarray(omegas, dtype=np.float64)
    if omegas.ndim != 1 or omegas.size == 0:
        raise ValidationError("omegas must be a non-empty 1-D sequence")
    if np.any(omegas <= STICTION_QDOT_EPS):
        raise ValidationError(
            f"all test speeds must exceed the stiction threshold {STICTION_QDOT_EPS}"
        )
    noise_std = _require_finite("noise_std", noise_std)
    if noise_std < 0.0:
        raise ValidationError("noise_std must be >= 0")
    tau = params.friction_loss + params.damping * omegas
    if noise_std > 0.0:
        rng = np.random.default_rng(seed)
        tau = tau + rng.normal(0.0, noise_std, omegas.size)
    return [BackdriveSample(float(w), float(v)) for w, v in zip(omegas, tau)]


@dataclass(frozen=True)
class FrictionDampingFit:
    """Line fit through backdrive samples; intercept_clamped flags a negative
    intercept forced to zero."""

    tau_f: float
    damping: float
    intercept_clamped: bool = False


def fit_friction_damping(samples) -> FrictionDampingFit:
    """Ordinary least squares of tau over omega: intercept = friction loss,
    slope = damping."""
    if len(samples) < 2:
        raise ValidationError("need at least 2 backdrive samples")
    omega = np.array([s.omega for s in samples])
    tau = np.array([s.tau_resist for s in samples])
    if np.unique(omega).size < 2:
        raise ValidationError("backdrive speeds are degenerate (all equal)")
    slope, intercept = np.polyfit(omega, tau, 1)
    clamped = intercept < 0.0
    if clamped:
        intercept = 0.0
    return FrictionDampingFit(float(intercept), float(slope), bool(clamped))


@dataclass(frozen=True)
class SpindownTrace:
    """Unpowered free-deceleration record. ``reached_rest`` is False when the
    run hit the duration cap before stopping (no dissipation)."""

    dt: float
    omega_series: np.ndarray
    reached_rest: bool = True

    def __post_init__(self):
        dt = _require_finite("dt", self.dt)
        if dt <= 0.0:
            raise ValidationError(f"dt must be > 0, got {dt}")
        object.__setattr__(self, "dt", dt)
        arr = np.asarray(self.omega_series, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValidationError("omega_series must be a non-empty 1-D array")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("omega_series must be finite")
        if arr[0] <= 0.0:
            raise ValidationError("first spin-down sample must be > 0")
        object.__setattr__(self, "omega_series", arr)

    def __len__(self) -> int:
        return self.omega_series.shape[0]


def run_spindown(
    params: ActuatorParams,
    omega0: float,
    dt: float = DEFAULT_DT,
    max_duration: float = 60.0,
) -> SpindownTrace:
    """Cut power at speed omega0 and integrate I*domega = -(tau_f*sign + d*omega)
    until rest.

    Uses the same integrator as the tracking simulation (powered off, no load)
    so generator and estimator share one dynamics definition. Runs without
    dissipation are capped at max_duration and flagged.
    """
    omega0 = _require_finite("omega0", omega0)
    if omega0 <= 0.0:
        raise ValidationError(f"omega0 must be > 0, got {omega0}")
    if dt <= 0.0 or dt > MAX_STEP_DT:
        raise ValidationError(f"dt must be in (0, {MAX_STEP_DT}] s")
    max_steps = int(math.ceil(max_duration / dt))
    chunk = 20000
    series = [omega0]
    q = 0.0
    v = omega0
    done = 0
    reached_rest = False
    while done < max_steps:
        n = min(chunk, max_steps - done) + 1
        trace = simulate_tracking(
            np.zeros(n), dt, params, kp=0.0, powered=False, q0=q, qdot0=v
        )
        qdot = trace.qdot[1:]
        rest = np.flatnonzero(qdot == 0.0)
        if rest.size:
            series.extend(qdot[: rest[0] + 1].tolist())
            reached_rest = True
            break
        series.extend(qdot.tolist())
        q = float(trace.q[-1])
        v = float(trace.qdot[-1])
        done += n - 1
    return SpindownTrace(dt=dt, omega_series=np.array(series), reached_rest=reached_rest)


def estimate_armature(trace: SpindownTrace, tau_f: float, damping: float) -> float:
    """Armature inertia 2*E/omega0^2 from the dissipated energy
    E = integral of (tau_f*|omega| + d*omega^2) dt over the spin-down."""
    if len(trace) < 2:
        raise ValidationError("spin-down trace too short to integrate (need >= 2 samples)")
    tau_f = _require_finite("tau_f", tau_f)
    damping = _require_finite("damping", damping)
    omega = trace.omega_series
    omega0 = omega[0]
    if omega0 == 0.0:
        raise ValidationError("initial spin-down speed must be nonzero")
    power = tau_f * np.abs(omega) + damping * omega * omega
    energy = float(np.trapezoid(power, dx=trace.dt))
    return 2.0 * energy / float(omega0 * omega0)
