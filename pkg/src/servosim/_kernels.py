"""Hot integration loops: numba-compiled by default, pure-Python fallback.

Set SERVOSIM_BACKEND=numpy to skip JIT compilation (debugging, or machines
without a working numba). Both paths run the exact same arithmetic, so the
produced trajectories are bit-for-bit identical; ``python -m servosim.bench``
compares their speed.
"""

import math
import os
import warnings

import numpy as np


def _integrate_series_impl(
    setpoints,
    external,
    q0,
    qdot0,
    dt,
    kp,
    kd,
    powered,
    damping,
    armature,
    friction_loss,
    tau_max,
    qdot_tau_max,
    qdot_max,
    tau_at_qdot_max,
    kd_min,
    tau_brake,
    passive_ratio,
    load_inertia,
    gravity_amp,
    stiction_eps,
):
    # Semi-implicit Euler over one setpoint series. Row 0 is the initial
    # state; row i+1 results from holding setpoints[i] over one dt.
    n = setpoints.shape[0]
    q_out = np.empty(n)
    v_out = np.empty(n)
    inertia = armature + load_inertia
    q = q0
    v = qdot0
    q_out[0] = q
    v_out[0] = v
    for i in range(n - 1):
        if powered:
            tau_m = kp * (setpoints[i] - q) - (kd_min + kd) * v
        else:
            tau_m = 0.0

        # accelerating torque capped by the speed-dependent ceiling,
        # decelerating torque by the constant brake limit
        s = -v if v < 0.0 else v
        if s <= qdot_tau_max:
            ceiling = tau_max
        elif s <= qdot_max:
            ceiling = tau_max + (tau_at_qdot_max - tau_max) * (
                (s - qdot_tau_max) / (qdot_max - qdot_tau_max)
            )
        else:
            ceiling = 0.0
        if v >= 0.0:
            lo = -tau_brake
            hi = ceiling
        else:
            lo = -ceiling
            hi = tau_brake
        tau_mc = tau_m
        if tau_mc > hi:
            tau_mc = hi
        if tau_mc < lo:
            tau_mc = lo

        tau_ext = external[i] + gravity_amp * math.sin(q)

        if s <= stiction_eps:
            # at rest: Coulomb deadband on the total applied torque
            tau_app = tau_mc + tau_ext
            t_abs = -tau_app if tau_app < 0.0 else tau_app
            if t_abs <= friction_loss:
                v = 0.0
            else:
                brk = friction_loss if tau_app > 0.0 else -friction_loss
                v = v + (tau_app - brk) * dt / inertia
                q = q + v * dt
        else:
            # moving: resistance opposes the motion; amplified when the
            # gearbox is driven from the output side
            if powered:
                backdriven = tau_m * v < 0.0
            else:
                backdriven = tau_ext * v > 0.0
            tau_r = friction_loss + damping * s
            if backdriven:
                tau_r = tau_r * passive_ratio
            v1 = v + (tau_mc + tau_ext) * dt / inertia
            dv = tau_r * dt / inertia
            if v > 0.0:
                if v1 >= 0.0:
                    v2 = v1 - dv
                    if v2 < 0.0:
                        v2 = 0.0  # friction stops, never reverses
                else:
                    v2 = v1
            else:
                if v1 <= 0.0:
                    v2 = v1 + dv
                    if v2 > 0.0:
                        v2 = 0.0
                else:
                    v2 = v1
            v = v2
            q = q + v * dt

        q_out[i + 1] = q
        v_out[i + 1] = v
    return q_out, v_out


integrate_series_py = _integrate_series_impl

_requested = os.environ.get("SERVOSIM_BACKEND", "numba").strip().lower()
if _requested not in ("numba", "numpy"):
    warnings.warn(
        f"unknown SERVOSIM_BACKEND={_requested!r}, expected 'numba' or 'numpy'; "
        "using 'numba'",
        stacklevel=1,
    )
    _requested = "numba"

if _requested == "numba":
    try:
        from numba import njit

        integrate_series = njit(cache=True)(_integrate_series_impl)
        BACKEND = "numba"
    except ImportError:
        integrate_series = _integrate_series_impl
        BACKEND = "numpy"
else:
    integrate_series = _integrate_series_impl
    BACKEND = "numpy"
