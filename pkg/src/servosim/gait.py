"""Walking reference generation and balance control laws.

Footstep plans feed a piecewise-linear ZMP reference (stance-foot center
during single support, linear blend during double support). The CoM
trajectory is the closed-form solution of the linear inverted pendulum
xddot = (g/z)(x - p) against that reference, solved segment-wise in
divergent/convergent coordinates with a cyclic boundary condition, so the
result is bounded for arbitrarily long plans. The phase signal and the
two-layer balance PD laws are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .metrics import GRAVITY

FEET = ("left", "right")

DEFAULT_Z_COM = 0.22
DEFAULT_STEP_DURATION = 0.5
DEFAULT_STANCE_WIDTH = 0.08
DEFAULT_DS_FRACTION = 0.2
DEFAULT_GAIT_DT = 0.01


@dataclass(frozen=True)
class FootStep:
    foot: str
    position: np.ndarray  # planar [m]
    heading: float  # [rad]
    touchdown: float  # [s]

    def __post_init__(self):
        if self.foot not in FEET:
            raise ValidationError(f"foot must be one of {FEET}, got {self.foot!r}")
        pos = np.asarray(self.position, dtype=np.float64)
        if pos.shape != (2,) or not np.all(np.isfinite(pos)):
            raise ValidationError("footstep position must be a finite planar point")
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class FootstepPlan:
    steps: tuple
    step_duration: float
    double_support_fraction: float

    def __post_init__(self):
        steps = tuple(self.steps)
        if len(steps) < 2:
            raise ValidationError("a plan needs at least 2 steps")
        object.__setattr__(self, "steps", steps)
        if self.step_duration <= 0.0:
            raise ValidationError("step_duration must be > 0")
        if not 0.0 <= self.double_support_fraction <= 0.5:
            raise ValidationError("double_support_fraction must be in [0, 0.5]")
        times = [s.touchdown for s in steps]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValidationError("touchdown times must be strictly increasing")
        for a, b in zip(steps, steps[1:]):
            if a.foot == b.foot:
                raise ValidationError("steps must alternate feet")

    @property
    def duration(self) -> float:
        return self.steps[-1].touchdown + self.step_duration


def plan_footsteps(
    vx: float,
    vy: float,
    wz: float,
    n_steps: int,
    step_duration: float = DEFAULT_STEP_DURATION,
    stance_width: float = DEFAULT_STANCE_WIDTH,
    double_support_fraction: float = DEFAULT_DS_FRACTION,
    start_foot: str = "left",
) -> FootstepPlan:
    """Alternating footsteps tracking planar velocity commands.

    Each step advances the gait frame by R(heading) @ (vx, vy) * step_duration
    with the heading integrated from wz; feet sit at +/- stance_width/2
    laterally. Zero commands produce marching in place.
    """
    if n_steps < 2:
        raise ValidationError("n_steps must be >= 2")
    if step_duration <= 0.0:
        raise ValidationError("step_duration must be > 0")
    if stance_width < 0.0:
        raise ValidationError("stance_width must be >= 0")
    if start_foot not in FEET:
        raise ValidationError(f"start_foot must be one of {FEET}")
    steps = []
    base = np.zeros(2)
    for i in range(n_steps):
        heading = wz * step_duration * i
        rot = np.array(
            [[math.cos(heading), -math.sin(heading)], [math.sin(heading), math.cos(heading)]]
        )
        if i > 0:
            base = base + rot @ np.array([vx * step_duration, vy * step_duration])
        foot = FEET[(FEET.index(start_foot) + i) % 2]
        side = 0.5 if foot == "left" else -0.5
        position = base + rot @ np.array([0.0, side * stance_width])
        steps.append(
            FootStep(foot=foot, position=position, heading=heading, touchdown=i * step_duration)
        )
    return FootstepPlan(
        steps=tuple(steps),
        step_duration=step_duration,
        double_support_fraction=double_support_fraction,
    )


def _virtual_prev_center(plan: FootstepPlan) -> np.ndarray:
    """Where the opposite foot stands when the walk begins.

    Serves as the hand-off point for step 0 so the first step gets the same
    double-support transition as every later one; cyclic plans then produce
    an exactly periodic reference.
    """
    first, second = plan.steps[0], plan.steps[1]
    heading = first.heading
    rot = np.array(
        [[math.cos(heading), -math.sin(heading)], [math.sin(heading), math.cos(heading)]]
    )
    lateral = rot.T @ (second.position - first.position)
    return first.position + rot @ np.array([0.0, lateral[1]])


def _support_at(plan: FootstepPlan, t: float):
    """Active support at time t: (prev_center, center, blend in [0, 1]).

    blend < 1 means double support interpolating prev -> current; blend == 1
    is single support on the current foot.
    """
    steps = plan.steps
    n = len(steps)
    t0 = steps[0].touchdown
    if t < t0:
        raise ValidationError(f"t={t} precedes the first touchdown {t0}")
    i = n - 1
    for k in range(n - 1):
        if t < steps[k + 1].touchdown:
            i = k
            break
    window = (
        steps[i + 1].touchdown - steps[i].touchdown if i + 1 < n else plan.step_duration
    )
    ds_time = plan.double_support_fraction * window
    local = t - steps[i].touchdown
    if i == 0:
        prev_center = _virtual_prev_center(plan)
    else:
        prev_center = steps[i - 1].position
    if ds_time > 0.0 and local < ds_time:
        return prev_center, steps[i].position, local / ds_time
    return prev_center, steps[i].position, 1.0


@dataclass(frozen=True)
class ZmpReference:
    """Planar ZMP targets sampled every dt, piecewise-linear in time."""

    dt: float
    zmp: np.ndarray

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValidationError("dt must be > 0")
        z = np.asarray(self.zmp, dtype=np.float64)
        if z.ndim != 2 or z.shape[1] != 2 or z.shape[0] == 0:
            raise ValidationError("zmp must be an (n, 2) array")
        if not np.all(np.isfinite(z)):
            raise ValidationError("zmp must be finite")
        object.__setattr__(self, "zmp", z)

    def __len__(self) -> int:
        return self.zmp.shape[0]

    def times(self) -> np.ndarray:
        return np.arange(len(self)) * self.dt


def zmp_reference(plan: FootstepPlan, dt: float = DEFAULT_GAIT_DT) -> ZmpReference:
    """Sample the plan's ZMP: stance-foot center during single support, linear
    interpolation between consecutive centers during double support."""
    if dt <= 0.0:
        raise ValidationError("dt must be > 0")
    if plan.steps[0].touchdown != 0.0:
        raise ValidationError("plan must start at t=0")
    n = int(round(plan.duration / dt))
    points = np.empty((n + 1, 2))
    for j in range(n + 1):
        t = min(j * dt, plan.duration)
        prev_center, center, blend = _support_at(plan, t)
        points[j] = (1.0 - blend) * prev_center + blend * center
    return ZmpReference(dt=dt, zmp=points)


def support_distance(plan: FootstepPlan, ref: ZmpReference) -> np.ndarray:
    """Distance from each ZMP sample to its active support set (the stance
    center, or the segment between centers during double support)."""
    out = np.empty(len(ref))
    for j, t in enumerate(ref.times()):
        t = min(float(t), plan.duration)
        prev_center, center, blend = _support_at(plan, t)
        p = ref.zmp[j]
        if blend >= 1.0:
            out[j] = float(np.linalg.norm(p - center))
        else:
            d = center - prev_center
            dd = float(d @ d)
            s = 0.0 if dd == 0.0 else float(np.clip((p - prev_center) @ d / dd, 0.0, 1.0))
            out[j] = float(np.linalg.norm(p - (prev_center + s * d)))
    return out


@dataclass(frozen=True)
class ComTrajectory:
    """CoM plan at constant height: position, velocity, acceleration per sample."""

    dt: float
    position: np.ndarray
    velocity: np.ndarray
    acceleration: np.ndarray
    z_com: float

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValidationError("dt must be > 0")
        if self.z_com <= 0.0:
            raise ValidationError("z_com must be > 0")
        for name in ("position", "velocity", "acceleration"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise ValidationError(f"{name} must be an (n, 2) array")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, arr)
        n = self.position.shape[0]
        if self.velocity.shape[0] != n or self.acceleration.shape[0] != n:
            raise ValidationError("trajectory arrays must share one length")

    def __len__(self) -> int:
        return self.position.shape[0]

    def times(self) -> np.ndarray:
        return np.arange(len(self)) * self.dt


def com_trajectory(zmp: ZmpReference, z_com: float = DEFAULT_Z_COM, g: float = GRAVITY) -> ComTrajectory:
    """Closed-form CoM trajectory tracking a piecewise-linear ZMP.

    Solves xddot = (g/z)(x - p) per axis with the cyclic boundary condition
    x(T) - x(0) = p(T) - p(0), xdot(T) = xdot(0). The divergent component is
    integrated backward and the convergent one forward, which keeps the
    linear solve well conditioned regardless of plan length.
    """
    if z_com <= 0.0:
        raise ValidationError("z_com must be > 0")
    if g <= 0.0:
        raise ValidationError("g must be > 0")
    p = zmp.zmp
    n = p.shape[0] - 1
    if n < 1:
        raise ValidationError("zmp reference needs at least 2 samples")
    omega = math.sqrt(g / z_com)
    h = zmp.dt
    lam = math.exp(-omega * h)
    lam_n = lam**n
    slope = (p[1:] - p[:-1]) / h
    drift = p[-1] - p[0]

    # convergent component zeta = x - xdot/omega, stable forward
    zp = p[:-1] - slope / omega  # particular solution at segment starts
    zp_end = p[1:] - slope / omega
    acc = np.zeros(2)
    for i in range(n):
        acc = lam * acc + (zp_end[i] - lam * zp[i])
    zeta0 = (drift - acc) / (lam_n - 1.0)
    zeta = np.empty((n + 1, 2))
    zeta[0] = zeta0
    for i in range(n):
        zeta[i + 1] = lam * zeta[i] + (zp_end[i] - lam * zp[i])

    # divergent component xi = x + xdot/omega, stable backward
    xp = p[:-1] + slope / omega
    xp_end = p[1:] + slope / omega
    acc = np.zeros(2)
    for i in range(n - 1, -1, -1):
        acc = lam * acc + (xp[i] - lam * xp_end[i])
    xi0 = (lam_n * drift + acc) / (1.0 - lam_n)
    xi = np.empty((n + 1, 2))
    xi[-1] = xi0 + drift
    for i in range(n - 1, -1, -1):
        xi[i] = lam * xi[i + 1] + (xp[i] - lam * xp_end[i])

    x = 0.5 * (xi + zeta)
    v = 0.5 * omega * (xi - zeta)
    a = (omega * omega) * (x - p)
    span = float(np.max(np.abs(p - p[0]))) if n > 0 else 0.0
    bound = 100.0 * max(1.0, span)
    if not np.all(np.isfinite(x)) or np.max(np.abs(x - p)) > bound:
        raise ValidationError(
            "LIPM boundary setup diverged (hyperbolic growth exceeded bound)"
        )
    return ComTrajectory(dt=zmp.dt, position=x, velocity=v, acceleration=a, z_com=z_com)


def lipm_residual(traj: ComTrajectory, zmp: ZmpReference, g: float = GRAVITY) -> np.ndarray:
    """Pointwise |xddot - (g/z)(x - p)| of a trajectory against its reference."""
    if len(traj) != len(zmp):
        raise ValidationError("trajectory and reference lengths differ")
    omega_sq = g / traj.z_com
    return np.abs(traj.acceleration - omega_sq * (traj.position - zmp.zmp)).max(axis=1)


def reconstruct_zmp(traj: ComTrajectory, g: float = GRAVITY) -> np.ndarray:
    """Invert the LIPM: p = x - (z/g) * xddot."""
    return traj.position - (traj.z_com / g) * traj.acceleration


def phase_signal(t, period: float):
    """Cyclic gait phase as (sin, cos) of 2*pi*(t mod period)/period."""
    if period <= 0.0:
        raise ValidationError("period must be > 0")
    phi = 2.0 * np.pi * (np.asarray(t, dtype=np.float64) % period) / period
    s, c = np.sin(phi), np.cos(phi)
    if np.isscalar(t):
        return float(s), float(c)
    return s, c


@dataclass(frozen=True)
class GaitPhase:
    period: float

    def __post_init__(self):
        if self.period <= 0.0:
            raise ValidationError("period must be > 0")

    def at(self, t):
        return phase_signal(t, self.period)


@dataclass(frozen=True)
class BalanceGains:
    """Gains of the two balance layers: CoM recentring and torso pitch."""

    com_kp: float = 0.0
    com_kd: float = 0.0
    pitch_kp: float = 0.0
    pitch_kd: float = 0.0

    def __post_init__(self):
        for name in ("com_kp", "com_kd", "pitch_kp", "pitch_kd"):
            if getattr(self, name) < 0.0:
                raise ValidationError(f"{name} must be >= 0")


def com_pd(com_offset, com_vel, gains: BalanceGains) -> np.ndarray:
    """Restoring CoM command -kp*offset - kd*vel, planar.

    The offset is measured from the support-polygon center, so the output
    always pushes the CoM back toward it.
    """
    offset = np.asarray(com_offset, dtype=np.float64)
    vel = np.asarray(com_vel, dtype=np.float64)
    if offset.shape != (2,) or vel.shape != (2,):
        raise ValidationError("com_offset and com_vel must be planar (2,) vectors")
    return -gains.com_kp * offset - gains.com_kd * vel


def torso_pitch_pd(pitch: float, pitch_rate: float, gains: BalanceGains) -> float:
    """Hip-pitch correction -kp*pitch - kd*pitch_rate keeping the torso upright."""
    return -gains.pitch_kp * pitch - gains.pitch_kd * pitch_rate
