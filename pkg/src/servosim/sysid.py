"""Joint fit of all actuation-model parameters to a tracking trace.

The objective is the mean absolute position error (degrees) between the
reference trace and a re-simulation of its setpoints with candidate
parameters. The optimizer is bounded Nelder-Mead in box-normalized
coordinates with uniform multi-start and a final polish from the best point;
everything is deterministic under a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from . import _kernels
from .actuator import (
    MAX_STEP_DT,
    STICTION_QDOT_EPS,
    ActuatorParams,
    LoadConfig,
    Trace,
)
from .errors import ValidationError

RAD_TO_DEG = 180.0 / np.pi

# the nine identified parameters, in canonical vector order
FIT_PARAM_NAMES = (
    "damping",
    "armature",
    "friction_loss",
    "tau_max",
    "qdot_tau_max",
    "qdot_max",
    "tau_at_qdot_max",
    "kd_min",
    "tau_brake",
)

_IDX = {name: i for i, name in enumerate(FIT_PARAM_NAMES)}

# excitation protocol for self-generated reference traces: sweeps from a
# friction-dominated crawl through the speed-limited regime
DEFAULT_CHIRP_F0 = 0.2
DEFAULT_CHIRP_F1 = 4.0
DEFAULT_CHIRP_AMPLITUDE = 0.5
DEFAULT_CHIRP_DURATION = 10.0
DEFAULT_TRACKING_KP = 6.0
DEFAULT_TRACKING_KD = 0.0


def params_to_vector(params: ActuatorParams) -> np.ndarray:
    return np.array([getattr(params, name) for name in FIT_PARAM_NAMES])


def vector_to_params(
    vec, passive_active_ratio: float = 3.0, kp_conversion: float = 150.0
) -> ActuatorParams:
    vec = np.asarray(vec, dtype=np.float64)
    kwargs = {name: float(vec[i]) for i, name in enumerate(FIT_PARAM_NAMES)}
    return ActuatorParams(
        passive_active_ratio=passive_active_ratio,
        kp_conversion=kp_conversion,
        **kwargs,
    )


def _vector_violation(vec: np.ndarray) -> float:
    """0 when the vector satisfies the cross-parameter invariants, else the
    total constraint slack (used as a smooth penalty during search)."""
    v = 0.0
    v += max(0.0, vec[_IDX["qdot_tau_max"]] - vec[_IDX["qdot_max"]])
    v += max(0.0, vec[_IDX["tau_at_qdot_max"]] - vec[_IDX["tau_max"]])
    v += max(0.0, vec[_IDX["tau_max"]] - vec[_IDX["tau_brake"]])
    if vec[_IDX["qdot_tau_max"]] <= 0.0:
        v += 1.0 - vec[_IDX["qdot_tau_max"]]
    if vec[_IDX["qdot_max"]] <= vec[_IDX["qdot_tau_max"]]:
        v += 1e-6
    return v


@dataclass(frozen=True)
class ParamBounds:
    """Per-parameter [lower, upper] box for the nine fitted parameters,
    ordered as FIT_PARAM_NAMES. Both corners must be valid parameter sets."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=np.float64)
        upper = np.asarray(self.upper, dtype=np.float64)
        if lower.shape != (9,) or upper.shape != (9,):
            raise ValidationError("bounds must each hold 9 values")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValidationError("bounds must be finite")
        if np.any(lower < 0.0):
            raise ValidationError("lower bounds must be >= 0")
        if np.any(lower > upper):
            bad = FIT_PARAM_NAMES[int(np.argmax(lower > upper))]
            raise ValidationError(f"lower bound exceeds upper bound for {bad}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        # both corners must themselves be buildable parameter sets
        vector_to_params(lower)
        vector_to_params(upper)

    @classmethod
    def around(
        cls, params: ActuatorParams, lo_factor: float = 0.2, hi_factor: float = 5.0
    ) -> "ParamBounds":
        vec = params_to_vector(params)
        return cls(lower=vec * lo_factor, upper=vec * hi_factor)

    @classmethod
    def hull(cls, params_list, widen: float = 2.0) -> "ParamBounds":
        vecs = np.stack([params_to_vector(p) for p in params_list])
        return cls(lower=vecs.min(axis=0) / widen, upper=vecs.max(axis=0) * widen)

    def contains(self, vec) -> bool:
        vec = np.asarray(vec, dtype=np.float64)
        return bool(np.all(vec >= self.lower) and np.all(vec <= self.upper))

    def sample(self, rng: np.random.Generator, max_tries: int = 1000) -> np.ndarray:
        """Uniform draw from the box, rejecting cross-parameter violations."""
        for _ in range(max_tries):
            vec = rng.uniform(self.lower, self.upper)
            if _vector_violation(vec) == 0.0:
                return vec
        return 0.5 * (self.lower + self.upper)


def default_bounds(family: Optional[str] = None) -> ParamBounds:
    """[0.2x, 5x] around a named preset family, or the 2x-widened hull of all
    bundled presets when no family is given."""
    from .fileio import PRESET_FAMILIES, load_preset

    if family is None:
        return ParamBounds.hull([load_preset(f) for f in PRESET_FAMILIES])
    return ParamBounds.around(load_preset(family))


@dataclass(frozen=True)
class FitConfig:
    """Search budget knobs.

    restarts: simplex descents per fit. prescreen: uniform candidates drawn
    per restart; the best-scoring draws become the descent starts.
    polish_rounds: extra descents from the incumbent best (lightly jittered
    after the first), stopped early after two rounds without improvement.
    """

    restarts: int = 8
    max_iters: int = 2000
    seed: int = 0
    prescreen: int = 8
    polish_rounds: int = 8
    passive_active_ratio: float = 3.0
    kp_conversion: float = 150.0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValidationError("restarts must be >= 1")
        if self.max_iters < 1:
            raise ValidationError("max_iters must be >= 1")
        if self.prescreen < 1:
            raise ValidationError("prescreen must be >= 1")
        if self.polish_rounds < 0:
            raise ValidationError("polish_rounds must be >= 0")


@dataclass(frozen=True)
class FitResult:
    params: ActuatorParams
    mae_deg: float
    iterations: int
    restarts_used: int
    converged: bool

    def __post_init__(self):
        if self.mae_deg < 0.0:
            raise ValidationError("mae_deg must be >= 0")


def tracking_error(reference: Trace, simulated: Trace) -> float:
    """Mean absolute position gap between two equal-length traces, in degrees."""
    if len(reference) != len(simulated):
        raise ValidationError(
            f"trace lengths differ: {len(reference)} vs {len(simulated)}"
        )
    if abs(reference.dt - simulated.dt) > 1e-12:
        raise ValidationError(
            f"trace sample intervals differ: {reference.dt} vs {simulated.dt}"
        )
    return float(np.mean(np.abs(reference.q - simulated.q)) * RAD_TO_DEG)


class _Objective:
    """Tracking MAE of a candidate parameter vector; remembers the best valid
    point it has ever evaluated."""

    PENALTY_FLOOR = 1e3

    def __init__(self, reference: Trace, kp, kd, load: LoadConfig, config: FitConfig):
        self.setpoints = reference.setpoint
        self.q_ref = reference.q
        self.q0 = float(reference.q[0])
        self.qdot0 = float(reference.qdot[0])
        self.dt = reference.dt
        self.kp = kp
        self.kd = kd
        self.external = load.external_series(len(reference))
        self.load_inertia = load.inertia
        self.gravity_amp = load.gravity_torque_amplitude
        self.ratio = config.passive_active_ratio
        self.evals = 0
        self.best_value = np.inf
        self.best_vec = None

    def __call__(self, vec: np.ndarray) -> float:
        self.evals += 1
        violation = _vector_violation(vec)
        if violation > 0.0:
            return self.PENALTY_FLOOR * (1.0 + violation)
        q_sim, _ = _kernels.integrate_series(
            self.setpoints,
            self.external,
            self.q0,
            self.qdot0,
            self.dt,
            self.kp,
            self.kd,
            True,
            vec[0],
            vec[1],
            vec[2],
            vec[3],
            vec[4],
            vec[5],
            vec[6],
            vec[7],
            vec[8],
            self.ratio,
            self.load_inertia,
            self.gravity_amp,
            STICTION_QDOT_EPS,
        )
        mae = float(np.mean(np.abs(self.q_ref - q_sim)) * RAD_TO_DEG)
        if mae < self.best_value:
            self.best_value = mae
            self.best_vec = vec.copy()
        return mae


def fit_parameters(
    reference: Trace,
    kp: float,
    kd: float = DEFAULT_TRACKING_KD,
    load: LoadConfig = LoadConfig(),
    bounds: Optional[ParamBounds] = None,
    config: FitConfig = FitConfig(),
) -> FitResult:
    """Recover actuator parameters that reproduce a logged tracking trace.

    kp/kd are the physical gains that were active while the reference was
    logged; the passive-active ratio and gain conversion factor are held at
    their separately measured values. Multi-start Nelder-Mead, deterministic
    under config.seed.
    """
    if len(reference) < 2:
        raise ValidationError("reference trace must contain at least 2 samples")
    if reference.dt > MAX_STEP_DT:
        raise ValidationError(f"reference dt must be <= {MAX_STEP_DT} s")
    if bounds is None:
        bounds = default_bounds()
    if kp < 0.0 or kd < 0.0:
        raise ValidationError("gains must be >= 0")

    objective = _Objective(reference, kp, kd, load, config)

    # the parameters are positive scale quantities, so the simplex runs in
    # log-box coordinates; a linear-box pass is kept in the polish mix since
    # the two geometries escape different shallow minima
    lin_lo, lin_span = bounds.lower, bounds.upper - bounds.lower
    tiny = 1e-12
    log_lo = np.log(np.maximum(bounds.lower, tiny))
    log_span = np.log(np.maximum(bounds.upper, tiny)) - log_lo
    log_span = np.where(log_span > 0.0, log_span, 1.0)
    lin_span_safe = np.where(lin_span > 0.0, lin_span, 1.0)

    def obj_log(u):
        return objective(np.exp(log_lo + u * log_span))

    def obj_lin(x):
        return objective(lin_lo + x * lin_span)

    def to_log(vec):
        return (np.log(np.maximum(vec, tiny)) - log_lo) / log_span

    def to_lin(vec):
        return (vec - lin_lo) / lin_span_safe

    rng = np.random.default_rng(config.seed)
    options = {
        "maxiter": config.max_iters,
        "maxfev": 2 * config.max_iters,
        "xatol": 1e-4,
        "fatol": 1e-7,
        "adaptive": True,
    }
    unit_bounds = [(0.0, 1.0)] * 9
    iterations = 0
    converged = False

    def descend(fun, u0):
        nonlocal iterations, converged
        res = minimize(
            fun,
            np.clip(u0, 0.0, 1.0),
            method="Nelder-Mead",
            bounds=unit_bounds,
            options=options,
        )
        iterations += int(res.nit)
        converged = converged or bool(res.success)

    # screen a larger uniform sample and descend from the most promising
    # draws: cheap insurance against the landscape's local minima
    candidates = [bounds.sample(rng) for _ in range(config.restarts * config.prescreen)]
    scores = [objective(c) for c in candidates]
    for idx in np.argsort(scores, kind="stable")[: config.restarts]:
        descend(obj_log, to_log(candidates[idx]))

    stall = 0
    previous = objective.best_value
    for round_idx in range(config.polish_rounds):
        if objective.best_vec is None:
            break
        if round_idx == 0:
            descend(obj_lin, to_lin(objective.best_vec))
        else:
            jitter = rng.normal(0.0, 0.06, 9)
            descend(obj_log, to_log(objective.best_vec) + jitter)
        if previous - objective.best_value < max(1e-4, 5e-3 * objective.best_value):
            stall += 1
            if stall >= 2 and round_idx >= 3:
                break
        else:
            stall = 0
        previous = objective.best_value

    if objective.best_vec is None:
        raise ValidationError("no valid parameter vector found inside the bounds")
    best = np.clip(objective.best_vec, bounds.lower, bounds.upper)
    params = vector_to_params(
        best,
        passive_active_ratio=config.passive_active_ratio,
        kp_conversion=config.kp_conversion,
    )
    return FitResult(
        params=params,
        mae_deg=objective.best_value,
        iterations=iterations,
        restarts_used=config.restarts,
        converged=converged,
    )
