import numpy as np
import pytest

from servosim import Trace, ValidationError, simulate_tracking
from servosim.sysid import (
    FIT_PARAM_NAMES,
    FitConfig,
    ParamBounds,
    default_bounds,
    fit_parameters,
    params_to_vector,
    tracking_error,
    vector_to_params,
)
from servosim.testbed import ChirpSpec, gen_chirp

RAD_TO_DEG = 180.0 / np.pi


def _short_reference(params, duration=2.0, kp=6.0):
    spec = ChirpSpec(f0=0.3, f1=3.0, amplitude=0.4, duration=duration, dt=1e-3)
    return simulate_tracking(gen_chirp(spec), 1e-3, params, kp=kp)


class TestTrackingError:
    def test_identical_traces(self, xc330):
        ref = _short_reference(xc330, duration=0.5)
        assert tracking_error(ref, ref) == 0.0

    def test_constant_offset_unit_conversion(self, xc330):
        ref = _short_reference(xc330, duration=0.5)
        shifted = Trace(
            dt=ref.dt, t=ref.t, setpoint=ref.setpoint, q=ref.q + 0.1, qdot=ref.qdot
        )
        assert tracking_error(ref, shifted) == pytest.approx(5.7296, abs=1e-4)

    def test_perturbed_parameter_gives_positive_error(self, xc330):
        ref = _short_reference(xc330)
        perturbed = vector_to_params(params_to_vector(xc330) * 1.2)
        sim = simulate_tracking(ref.setpoint, ref.dt, perturbed, kp=6.0)
        assert tracking_error(ref, sim) > 0.0

    def test_length_mismatch_rejected(self, xc330):
        ref = _short_reference(xc330, duration=0.5)
        shorter = Trace(
            dt=ref.dt,
            t=ref.t[:-1],
            setpoint=ref.setpoint[:-1],
            q=ref.q[:-1],
            qdot=ref.qdot[:-1],
        )
        with pytest.raises(ValidationError, match="length"):
            tracking_error(ref, shorter)

    def test_dt_mismatch_rejected(self, xc330):
        ref = _short_reference(xc330, duration=0.5)
        other = Trace(
            dt=2e-3, t=ref.t * 2, setpoint=ref.setpoint, q=ref.q, qdot=ref.qdot
        )
        with pytest.raises(ValidationError, match="interval"):
            tracking_error(ref, other)


class TestParamBounds:
    def test_around_factors(self, xc330):
        b = ParamBounds.around(xc330)
        i = FIT_PARAM_NAMES.index("damping")
        assert b.lower[i] == pytest.approx(0.00072, rel=1e-12)
        assert b.upper[i] == pytest.approx(0.018, rel=1e-12)

    def test_lower_above_upper_rejected(self):
        vec = np.ones(9)
        with pytest.raises(ValidationError):
            ParamBounds(lower=vec * 2, upper=vec)

    def test_invalid_corner_rejected(self):
        # lower corner violates qdot_max > qdot_tau_max
        lower = np.array([0.001, 0.001, 0.01, 0.5, 3.0, 1.0, 0.1, 0.1, 0.5])
        upper = lower * 10
        with pytest.raises(ValidationError):
            ParamBounds(lower=lower, upper=upper)

    def test_sample_respects_box_and_invariants(self, xc330):
        b = default_bounds("XC330")
        rng = np.random.default_rng(0)
        for _ in range(50):
            vec = b.sample(rng)
            assert b.contains(vec)
            vector_to_params(vec)  # must not raise


class TestDefaultBounds:
    def test_known_family_brackets(self, all_presets):
        b = default_bounds("XM430-W210")
        i = FIT_PARAM_NAMES.index("tau_max")
        assert b.lower[i] <= 1.61 <= b.upper[i]

    def test_hull_contains_every_family(self, all_presets):
        b = default_bounds(None)
        for params in all_presets.values():
            vec = params_to_vector(params)
            assert b.contains(vec)

    def test_unknown_family_rejected(self):
        with pytest.raises(ValidationError, match="unknown motor family"):
            default_bounds("AX-12")


class TestFitParameters:
    def test_objective_zero_at_generating_params(self, xc330):
        ref = _short_reference(xc330)
        sim = simulate_tracking(ref.setpoint, ref.dt, xc330, kp=6.0)
        assert tracking_error(ref, sim) == 0.0

    def test_deterministic_under_seed(self, xc330):
        ref = _short_reference(xc330, duration=1.0)
        cfg = FitConfig(restarts=2, prescreen=2, polish_rounds=1, max_iters=120, seed=3)
        a = fit_parameters(ref, kp=6.0, bounds=default_bounds("XC330"), config=cfg)
        b = fit_parameters(ref, kp=6.0, bounds=default_bounds("XC330"), config=cfg)
        assert a.mae_deg == b.mae_deg
        assert params_to_vector(a.params).tobytes() == params_to_vector(b.params).tobytes()
        assert a.iterations == b.iterations

    def test_result_no_worse_than_best_start_and_inside_bounds(self, xc330):
        ref = _short_reference(xc330, duration=1.0)
        bounds = default_bounds("XC330")
        cfg = FitConfig(restarts=3, prescreen=2, polish_rounds=1, max_iters=100, seed=1)
        result = fit_parameters(ref, kp=6.0, bounds=bounds, config=cfg)
        # reproduce the seeded starts and score them through the public API
        rng = np.random.default_rng(cfg.seed)
        starts = [bounds.sample(rng) for _ in range(cfg.restarts * cfg.prescreen)]
        start_maes = [
            tracking_error(ref, simulate_tracking(ref.setpoint, ref.dt, vector_to_params(v), kp=6.0))
            for v in starts
        ]
        assert result.mae_deg <= min(start_maes) + 1e-12
        assert bounds.contains(params_to_vector(result.params))
        assert result.restarts_used == cfg.restarts

    def test_round_trip_half_bounds_recovery(self, xc330):
        # +/-50% box around the generating parameters: the passive and inertia
        # parameters must come back within 15% and the fit must be tight
        spec = ChirpSpec(f0=0.2, f1=4.0, amplitude=0.5, duration=10.0, dt=1e-3)
        ref = simulate_tracking(gen_chirp(spec), 1e-3, xc330, kp=6.0)
        bounds = ParamBounds.around(xc330, 0.5, 1.5)
        result = fit_parameters(ref, kp=6.0, bounds=bounds, config=FitConfig(seed=0))
        assert result.mae_deg <= 0.3
        for name in ("damping", "friction_loss", "armature"):
            true = getattr(xc330, name)
            fitted = getattr(result.params, name)
            assert fitted == pytest.approx(true, rel=0.15), name

    def test_empty_reference_rejected(self, xc330):
        with pytest.raises(ValidationError):
            fit_parameters(
                Trace(dt=1e-3, t=[0.0], setpoint=[0.0], q=[0.0], qdot=[0.0]),
                kp=6.0,
                bounds=default_bounds("XC330"),
            )
