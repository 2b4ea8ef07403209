"""Command-line surface tying the modules into reproducible pipelines.

Every run ends with a single machine-readable JSON summary line on stdout.
Exit codes: 0 success, 1 validation/usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .actuator import DEFAULT_DT, LoadConfig, Trace, simulate_tracking
from .errors import ValidationError
from .fileio import (
    PRESET_FAMILIES,
    load_default_inventory,
    load_preset,
    read_bounds,
    read_inventory,
    read_params,
    read_trace,
    write_columns,
    write_params,
    write_trace,
)
from .gait import (
    DEFAULT_DS_FRACTION,
    DEFAULT_GAIT_DT,
    DEFAULT_STANCE_WIDTH,
    DEFAULT_STEP_DURATION,
    DEFAULT_Z_COM,
    com_trajectory,
    plan_footsteps,
    zmp_reference,
)
from .metrics import power_factor_split
from .sysid import (
    DEFAULT_TRACKING_KD,
    DEFAULT_TRACKING_KP,
    FitConfig,
    default_bounds,
    fit_parameters,
)
from .testbed import (
    SENSOR_TORQUE_STD,
    ChirpSpec,
    default_backdrive_speeds,
    estimate_armature,
    fit_friction_damping,
    gen_chirp,
    run_backdrive,
    run_spindown,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _summary(**kwargs) -> None:
    print(json.dumps(kwargs, sort_keys=True))


def _resolve_params(args):
    if getattr(args, "family", None):
        return load_preset(args.family)
    if getattr(args, "params", None):
        return read_params(args.params)
    raise ValidationError("one of --params or --family is required")


def _parse_floats(text, n, what):
    parts = text.split(",")
    if len(parts) != n:
        raise ValidationError(f"{what} expects {n} comma-separated values")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ValidationError(f"{what}: malformed number") from exc


def _cmd_simulate(args) -> int:
    params = _resolve_params(args)
    f0, f1, amplitude, duration = _parse_floats(args.chirp, 4, "--chirp")
    spec = ChirpSpec(
        f0=f0, f1=f1, amplitude=amplitude, duration=duration, dt=args.dt, offset=args.offset
    )
    setpoints = gen_chirp(spec)
    trace = simulate_tracking(setpoints, args.dt, params, kp=args.kp, kd=args.kd)
    if args.noise_std > 0.0:
        rng = np.random.default_rng(args.seed)
        noisy_q = trace.q + rng.normal(0.0, args.noise_std, len(trace))
        trace = Trace(
            dt=trace.dt,
            t=trace.t,
            setpoint=trace.setpoint,
            q=noisy_q,
            qdot=trace.qdot,
            comments=trace.comments,
        )
    write_trace(trace, args.out)
    _summary(
        cmd="simulate",
        samples=len(trace),
        duration=duration,
        dt=args.dt,
        noise_std=args.noise_std,
        out=args.out,
    )
    return 0


def _cmd_testbed_backdrive(args) -> int:
    params = _resolve_params(args)
    if args.speeds:
        lo, hi, n = _parse_floats(args.speeds, 3, "--speeds")
        omegas = np.geomspace(lo, hi, int(n))
    else:
        omegas = default_backdrive_speeds(params)
    samples = run_backdrive(params, omegas, noise_std=args.noise_std, seed=args.seed)
    fit = fit_friction_damping(samples)
    write_columns(
        args.out,
        ("omega", "tau_resist"),
        (np.array([s.omega for s in samples]), np.array([s.tau_resist for s in samples])),
        comments=("backdrive samples",),
    )
    _summary(
        cmd="testbed-backdrive",
        n_samples=len(samples),
        noise_std=args.noise_std,
        seed=args.seed,
        tau_f=fit.tau_f,
        damping=fit.damping,
        intercept_clamped=fit.intercept_clamped,
        out=args.out,
    )
    return 0


def _cmd_testbed_spindown(args) -> int:
    params = _resolve_params(args)
    trace = run_spindown(params, omega0=args.omega0, dt=args.dt)
    t = np.arange(len(trace)) * trace.dt
    write_columns(
        args.out,
        ("t", "omega"),
        (t, trace.omega_series),
        comments=(f"dt={trace.dt!r}", "spin-down trace"),
    )
    armature = estimate_armature(trace, params.friction_loss, params.damping)
    _summary(
        cmd="testbed-spindown",
        omega0=args.omega0,
        samples=len(trace),
        reached_rest=trace.reached_rest,
        armature_estimate=armature,
        out=args.out,
    )
    return 0


def _cmd_fit(args) -> int:
    reference = read_trace(args.trace)
    if args.bounds:
        bounds = read_bounds(args.bounds)
    else:
        bounds = default_bounds(args.family)
    config = FitConfig(restarts=args.restarts, max_iters=args.max_iters, seed=args.seed)
    result = fit_parameters(
        reference,
        kp=args.kp,
        kd=args.kd,
        load=LoadConfig(),
        bounds=bounds,
        config=config,
    )
    write_params(result.params, args.out, family=args.family)
    _summary(
        cmd="fit",
        mae_deg=result.mae_deg,
        iterations=result.iterations,
        restarts=result.restarts_used,
        converged=result.converged,
        seed=args.seed,
        out=args.out,
    )
    return 0


def _cmd_metrics_power_factor(args) -> int:
    if args.inventory:
        inventory = read_inventory(args.inventory)
    else:
        inventory = load_default_inventory()
    split = power_factor_split(inventory, include_end_effectors=args.include_end_effectors)
    _summary(
        cmd="metrics-power-factor",
        inventory=inventory.name,
        torque_total=split.torque_total,
        power_factor=split.total,
        upper=split.upper,
        lower=split.lower,
        include_end_effectors=args.include_end_effectors,
    )
    return 0


def _cmd_gait(args) -> int:
    plan = plan_footsteps(
        vx=args.vx,
        vy=args.vy,
        wz=args.wz,
        n_steps=args.steps,
        step_duration=args.step_duration,
        stance_width=args.stance_width,
        double_support_fraction=args.ds_fraction,
    )
    ref = zmp_reference(plan, dt=args.dt)
    traj = com_trajectory(ref, z_com=args.z_com)
    t = traj.times()
    write_columns(
        args.out,
        ("t", "x", "y", "vx", "vy", "ax", "ay"),
        (
            t,
            traj.position[:, 0],
            traj.position[:, 1],
            traj.velocity[:, 0],
            traj.velocity[:, 1],
            traj.acceleration[:, 0],
            traj.acceleration[:, 1],
        ),
        comments=(f"dt={traj.dt!r}", f"z_com={traj.z_com!r}", "com trajectory"),
    )
    if args.zmp_out:
        write_columns(
            args.zmp_out,
            ("t", "px", "py"),
            (ref.times(), ref.zmp[:, 0], ref.zmp[:, 1]),
            comments=(f"dt={ref.dt!r}", "zmp reference"),
        )
    _summary(
        cmd="gait",
        steps=args.steps,
        samples=len(traj),
        duration=plan.duration,
        z_com=args.z_com,
        out=args.out,
    )
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="servosim", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def add_params_opts(p):
        p.add_argument("--params", help="parameter JSON file")
        p.add_argument(
            "--family", choices=PRESET_FAMILIES, help="bundled preset family"
        )

    p = sub.add_parser("simulate", help="simulate chirp tracking and write a trace")
    add_params_opts(p)
    p.add_argument("--chirp", required=True, metavar="F0,F1,A,T")
    p.add_argument("--offset", type=float, default=0.0)
    p.add_argument("--dt", type=float, default=DEFAULT_DT)
    p.add_argument("--kp", type=float, default=DEFAULT_TRACKING_KP)
    p.add_argument("--kd", type=float, default=DEFAULT_TRACKING_KD)
    p.add_argument("--noise-std", type=float, default=0.0, help="position noise [rad]")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("testbed", help="simulated test-bed experiments")
    tb = p.add_subparsers(dest="experiment")
    b = tb.add_parser("backdrive", help="constant-speed resistance sweep + line fit")
    add_params_opts(b)
    b.add_argument("--speeds", metavar="LO,HI,N", help="log-spaced speed grid")
    b.add_argument("--noise-std", type=float, default=SENSOR_TORQUE_STD)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.set_defaults(func=_cmd_testbed_backdrive)
    s = tb.add_parser("spindown", help="unpowered spin-down + armature estimate")
    add_params_opts(s)
    s.add_argument("--omega0", type=float, default=6.0)
    s.add_argument("--dt", type=float, default=DEFAULT_DT)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_testbed_spindown)

    p = sub.add_parser("fit", help="fit actuator parameters to a tracking trace")
    p.add_argument("--trace", required=True)
    p.add_argument("--bounds", help="bounds JSON file")
    p.add_argument("--family", choices=PRESET_FAMILIES, help="derive bounds from a preset")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--max-iters", type=int, default=1500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kp", type=float, default=DEFAULT_TRACKING_KP)
    p.add_argument("--kd", type=float, default=DEFAULT_TRACKING_KD)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("metrics", help="capability metrics")
    m = p.add_subparsers(dest="metric")
    pf = m.add_parser("power-factor", help="total stall torque over height*weight")
    pf.add_argument("--inventory", help="inventory JSON (default: bundled)")
    pf.add_argument("--include-end-effectors", action="store_true")
    pf.set_defaults(func=_cmd_metrics_power_factor)

    p = sub.add_parser("gait", help="walking reference generation")
    p.add_argument("--vx", type=float, default=0.0)
    p.add_argument("--vy", type=float, default=0.0)
    p.add_argument("--wz", type=float, default=0.0)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--step-duration", type=float, default=DEFAULT_STEP_DURATION)
    p.add_argument("--stance-width", type=float, default=DEFAULT_STANCE_WIDTH)
    p.add_argument("--ds-fraction", type=float, default=DEFAULT_DS_FRACTION)
    p.add_argument("--z-com", type=float, default=DEFAULT_Z_COM)
    p.add_argument("--dt", type=float, default=DEFAULT_GAIT_DT)
    p.add_argument("--out", required=True)
    p.add_argument("--zmp-out")
    p.set_defaults(func=_cmd_gait)

    return parser


def cli(argv=None) -> int:
    """Run one CLI invocation; returns the exit code."""
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli())
