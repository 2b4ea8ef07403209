import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from servosim import ValidationError
from servosim.gait import (
    BalanceGains,
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
from servosim.metrics import GRAVITY


def _marching_plan(n_steps=6, step_duration=0.5, width=0.08):
    return plan_footsteps(0.0, 0.0, 0.0, n_steps, step_duration, width)


class TestPlanFootsteps:
    def test_marching_in_place(self):
        plan = _marching_plan()
        for s in plan.steps:
            assert s.position[0] == pytest.approx(0.0, abs=1e-15)
            lateral = 0.04 if s.foot == "left" else -0.04
            assert s.position[1] == pytest.approx(lateral, abs=1e-15)

    def test_forward_spacing(self):
        plan = plan_footsteps(0.1, 0.0, 0.0, 4, 0.5, 0.08)
        xs = [s.position[0] for s in plan.steps]
        assert np.allclose(np.diff(xs), 0.05)

    def test_positive_turn_rate_increases_heading(self):
        plan = plan_footsteps(0.0, 0.0, 0.5, 5, 0.5, 0.08)
        headings = [s.heading for s in plan.steps]
        assert np.all(np.diff(headings) > 0.0)

    def test_feet_alternate_and_times_increase(self):
        plan = plan_footsteps(0.05, 0.02, 0.1, 7, 0.4, 0.08)
        feet = [s.foot for s in plan.steps]
        assert all(a != b for a, b in zip(feet, feet[1:]))
        times = [s.touchdown for s in plan.steps]
        assert all(b > a for a, b in zip(times, times[1:]))

    def test_too_few_steps_rejected(self):
        with pytest.raises(ValidationError):
            plan_footsteps(0.0, 0.0, 0.0, 1, 0.5, 0.08)

    def test_same_foot_twice_rejected(self):
        a = FootStep("left", np.array([0.0, 0.04]), 0.0, 0.0)
        b = FootStep("left", np.array([0.0, 0.04]), 0.0, 0.5)
        with pytest.raises(ValidationError, match="alternate"):
            FootstepPlan(steps=(a, b), step_duration=0.5, double_support_fraction=0.2)


class TestZmpReference:
    def test_marching_alternates_between_foot_centers(self):
        plan = _marching_plan()
        ref = zmp_reference(plan, dt=0.01)
        lat = ref.zmp[:, 1]
        assert lat.max() == pytest.approx(0.04, abs=1e-12)
        assert lat.min() == pytest.approx(-0.04, abs=1e-12)
        # single-support samples sit exactly on a foot center
        single = np.isclose(np.abs(lat), 0.04, atol=1e-12)
        assert single.mean() > 0.5

    def test_mid_double_support_is_midpoint(self):
        plan = _marching_plan(step_duration=0.5)
        # ds window is 0.1 s; t=0.55 is halfway through step 1's transition
        ref = zmp_reference(plan, dt=0.05)
        idx = int(round(0.55 / 0.05))
        assert ref.zmp[idx, 1] == pytest.approx(0.0, abs=1e-12)

    def test_zmp_inside_support_region(self):
        for cmd in ((0.0, 0.0, 0.0), (0.1, 0.0, 0.0), (0.08, 0.03, 0.4)):
            plan = plan_footsteps(*cmd, n_steps=8)
            ref = zmp_reference(plan, dt=0.01)
            assert support_distance(plan, ref).max() <= 1e-12

    def test_zero_double_support_fraction(self):
        plan = plan_footsteps(0.0, 0.0, 0.0, 4, 0.5, 0.08, double_support_fraction=0.0)
        ref = zmp_reference(plan, dt=0.01)
        assert np.all(np.abs(np.abs(ref.zmp[:, 1]) - 0.04) < 1e-12)


class TestComTrajectory:
    def test_constant_zmp_at_origin_stays_at_origin(self):
        ref = ZmpReference(dt=0.01, zmp=np.zeros((200, 2)))
        traj = com_trajectory(ref, z_com=0.22)
        assert np.max(np.abs(traj.position)) <= 1e-12
        assert np.max(np.abs(traj.velocity)) <= 1e-12

    def test_constant_offset_zmp_is_fixed_point(self):
        p0 = np.array([0.05, -0.02])
        ref = ZmpReference(dt=0.01, zmp=np.tile(p0, (150, 1)))
        traj = com_trajectory(ref, z_com=0.22)
        assert np.max(np.abs(traj.position - p0)) <= 1e-12
        assert np.max(np.abs(traj.velocity)) <= 1e-10

    def test_residual_and_reconstruction(self):
        for cmd in ((0.0, 0.0, 0.0), (0.1, 0.0, 0.0), (0.05, 0.02, 0.3)):
            plan = plan_footsteps(*cmd, n_steps=8)
            ref = zmp_reference(plan, dt=0.01)
            traj = com_trajectory(ref, z_com=0.22)
            assert lipm_residual(traj, ref).max() <= 1e-6
            assert np.max(np.abs(reconstruct_zmp(traj) - ref.zmp)) <= 1e-6

    def test_segment_boundary_continuity(self):
        # re-propagate each segment with the hyperbolic closed form and check
        # the handoff against the returned samples
        plan = _marching_plan(n_steps=6)
        ref = zmp_reference(plan, dt=0.01)
        traj = com_trajectory(ref, z_com=0.22)
        omega = np.sqrt(GRAVITY / traj.z_com)
        h = traj.dt
        p = ref.zmp
        slope = (p[1:] - p[:-1]) / h
        ch, sh = np.cosh(omega * h), np.sinh(omega * h)
        for i in range(len(traj) - 1):
            alpha = traj.position[i] - p[i]
            beta = (traj.velocity[i] - slope[i]) / omega
            x_next = alpha * ch + beta * sh + p[i + 1]
            v_next = omega * (alpha * sh + beta * ch) + slope[i]
            assert np.max(np.abs(x_next - traj.position[i + 1])) <= 1e-9
            assert np.max(np.abs(v_next - traj.velocity[i + 1])) <= 1e-9

    def test_marching_lateral_oscillation_symmetric(self):
        plan = _marching_plan(n_steps=6, step_duration=0.5)
        ref = zmp_reference(plan, dt=0.01)
        traj = com_trajectory(ref, z_com=0.22)
        lat = traj.position[:, 1]
        assert np.max(lat) > 0.005
        assert abs(np.max(lat) + np.min(lat)) <= 1e-6  # symmetric about midline
        # periodic with the two-step gait cycle
        cycle = int(round(1.0 / 0.01))
        assert np.max(np.abs(lat[:-cycle] - lat[cycle:])) <= 1e-9

    def test_marching_matches_dense_integration_oracle(self):
        plan = _marching_plan(n_steps=6, step_duration=0.5)
        ref = zmp_reference(plan, dt=0.01)
        traj = com_trajectory(ref, z_com=0.22)
        omega_sq = GRAVITY / traj.z_com
        t_nodes = ref.times()
        fine = 100
        h = traj.dt / fine

        def p_of(t, axis):
            return np.interp(t, t_nodes, ref.zmp[:, axis])

        for axis in (0, 1):
            x = traj.position[0, axis]
            v = traj.velocity[0, axis]
            worst = 0.0
            t = 0.0
            for i in range(len(traj) - 1):
                for _ in range(fine):
                    # classic RK4 on [x' = v, v' = w2*(x - p(t))]
                    k1x = v
                    k1v = omega_sq * (x - p_of(t, axis))
                    k2x = v + 0.5 * h * k1v
                    k2v = omega_sq * (x + 0.5 * h * k1x - p_of(t + 0.5 * h, axis))
                    k3x = v + 0.5 * h * k2v
                    k3v = omega_sq * (x + 0.5 * h * k2x - p_of(t + 0.5 * h, axis))
                    k4x = v + h * k3v
                    k4v = omega_sq * (x + h * k3x - p_of(t + h, axis))
                    x += (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
                    v += (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
                    t += h
                worst = max(worst, abs(x - traj.position[i + 1, axis]))
            assert worst <= 1e-4

    def test_too_short_reference_rejected(self):
        with pytest.raises(ValidationError):
            com_trajectory(ZmpReference(dt=0.01, zmp=np.zeros((1, 2))), z_com=0.22)

    def test_bad_height_rejected(self):
        ref = ZmpReference(dt=0.01, zmp=np.zeros((10, 2)))
        with pytest.raises(ValidationError):
            com_trajectory(ref, z_com=0.0)


class TestPhaseSignal:
    def test_cardinal_values(self):
        s, c = phase_signal(0.0, 1.0)
        assert (s, c) == (0.0, 1.0)
        s, c = phase_signal(0.25, 1.0)
        assert s == pytest.approx(1.0, abs=1e-12)
        assert c == pytest.approx(0.0, abs=1e-12)

    def test_periodicity(self):
        a = phase_signal(0.3, 0.7)
        b = phase_signal(0.3 + 0.7, 0.7)
        assert a[0] == pytest.approx(b[0], abs=1e-9)
        assert a[1] == pytest.approx(b[1], abs=1e-9)

    @given(st.floats(-100.0, 100.0), st.floats(0.01, 10.0))
    @settings(max_examples=200, deadline=None)
    def test_on_unit_circle(self, t, period):
        s, c = phase_signal(t, period)
        assert s * s + c * c == pytest.approx(1.0, abs=1e-12)

    def test_gait_phase_wrapper(self):
        gp = GaitPhase(period=2.0)
        assert gp.at(0.5) == phase_signal(0.5, 2.0)

    def test_bad_period_rejected(self):
        with pytest.raises(ValidationError):
            phase_signal(0.0, 0.0)


class TestBalanceLaws:
    def test_com_pd_equilibrium(self):
        gains = BalanceGains(com_kp=10.0, com_kd=2.0)
        out = com_pd((0.0, 0.0), (0.0, 0.0), gains)
        assert np.all(out == 0.0)

    def test_com_pd_arithmetic(self):
        gains = BalanceGains(com_kp=10.0)
        out = com_pd((0.02, 0.0), (0.0, 0.0), gains)
        assert out[0] == pytest.approx(-0.2, rel=1e-12)
        assert out[1] == 0.0

    def test_com_pd_restoring_direction(self):
        gains = BalanceGains(com_kp=5.0)
        rng = np.random.default_rng(0)
        for _ in range(20):
            offset = rng.normal(size=2)
            out = com_pd(offset, (0.0, 0.0), gains)
            assert np.dot(out, -offset) > 0.0

    def test_torso_pitch_pd(self):
        gains = BalanceGains(pitch_kp=2.0, pitch_kd=0.5)
        assert torso_pitch_pd(0.0, 0.0, gains) == 0.0
        assert torso_pitch_pd(0.1, 0.0, BalanceGains(pitch_kp=2.0)) == pytest.approx(-0.2)
        assert torso_pitch_pd(-0.3, 0.0, gains) > 0.0

    def test_negative_gains_rejected(self):
        with pytest.raises(ValidationError):
            BalanceGains(com_kp=-1.0)
