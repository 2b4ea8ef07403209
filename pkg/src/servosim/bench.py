"""Benchmark the numba kernel against the pure-Python fallback.

Run with ``python -m servosim.bench``. Times the tracking integrator on a
chirp workload with both backends and reports the speedup. The two paths
compute identical arithmetic, so the outputs are also compared bit-for-bit.
"""

import argparse
import time

import numpy as np

from . import _kernels
from .actuator import STICTION_QDOT_EPS
from .fileio import load_preset
from .sysid import DEFAULT_TRACKING_KP, params_to_vector
from .testbed import ChirpSpec, gen_chirp


def _run(fn, setpoints, external, vec, repeats):
    args = (
        setpoints,
        external,
        float(setpoints[0]),
        0.0,
        1e-3,
        DEFAULT_TRACKING_KP,
        0.0,
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
        3.0,
        0.0,
        0.0,
        STICTION_QDOT_EPS,
    )
    out = fn(*args)  # warmup / JIT compile
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return out, best


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--duration", type=float, default=10.0, help="trace length [s]")
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--family", default="XC330")
    args = parser.parse_args(argv)

    params = load_preset(args.family)
    spec = ChirpSpec(f0=0.2, f1=4.0, amplitude=0.5, duration=args.duration, dt=1e-3)
    setpoints = gen_chirp(spec)
    external = np.zeros_like(setpoints)
    vec = params_to_vector(params)

    n = setpoints.size
    print(f"workload: {n} integration steps, family {args.family}")
    out_py, t_py = _run(_kernels.integrate_series_py, setpoints, external, vec, args.repeats)
    print(f"python/numpy fallback: {t_py * 1e3:10.3f} ms  ({n / t_py:,.0f} steps/s)")
    if _kernels.BACKEND == "numba":
        out_nb, t_nb = _run(_kernels.integrate_series, setpoints, external, vec, args.repeats)
        print(f"numba kernel:          {t_nb * 1e3:10.3f} ms  ({n / t_nb:,.0f} steps/s)")
        print(f"speedup: {t_py / t_nb:,.1f}x")
        same = np.array_equal(out_py[0], out_nb[0]) and np.array_equal(out_py[1], out_nb[1])
        print(f"outputs bit-identical: {same}")
        if not same:
            return 1
    else:
        print("numba backend inactive (SERVOSIM_BACKEND=numpy or numba missing)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
