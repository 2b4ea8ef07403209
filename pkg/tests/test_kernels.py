import numpy as np
import pytest

from servosim import _kernels
from servosim.actuator import STICTION_QDOT_EPS
from servosim.fileio import load_preset
from servosim.sysid import params_to_vector
from servosim.testbed import ChirpSpec, gen_chirp


def _kernel_args(params, setpoints, gravity_amp=0.0, powered=True):
    vec = params_to_vector(params)
    external = np.zeros_like(setpoints)
    return (
        setpoints,
        external,
        float(setpoints[0]),
        0.0,
        1e-3,
        6.0,
        0.0,
        powered,
        vec[0],
        vec[1],
        vec[2],
        vec[3],
        vec[4],
        vec[5],
        vec[6],
        vec[7],
        vec[8],
        params.passive_active_ratio,
        0.0,
        gravity_amp,
        STICTION_QDOT_EPS,
    )


@pytest.mark.skipif(_kernels.BACKEND != "numba", reason="numba backend inactive")
class TestBackendEquivalence:
    def test_tracking_bit_identical(self):
        params = load_preset("XC330")
        spec = ChirpSpec(f0=0.3, f1=3.0, amplitude=0.5, duration=2.0, dt=1e-3)
        args = _kernel_args(params, gen_chirp(spec))
        q_nb, v_nb = _kernels.integrate_series(*args)
        q_py, v_py = _kernels.integrate_series_py(*args)
        assert np.array_equal(q_nb, q_py)
        assert np.array_equal(v_nb, v_py)

    def test_gravity_term_bit_identical(self):
        params = load_preset("XC430")
        spec = ChirpSpec(f0=0.3, f1=2.0, amplitude=0.4, duration=1.0, dt=1e-3)
        args = _kernel_args(params, gen_chirp(spec), gravity_amp=-0.2)
        q_nb, _ = _kernels.integrate_series(*args)
        q_py, _ = _kernels.integrate_series_py(*args)
        assert np.array_equal(q_nb, q_py)

    def test_unpowered_spindown_bit_identical(self):
        params = load_preset("XM430-W210")
        setpoints = np.zeros(2000)
        args = list(_kernel_args(params, setpoints, powered=False))
        args[3] = 5.0  # initial velocity
        q_nb, v_nb = _kernels.integrate_series(*args)
        q_py, v_py = _kernels.integrate_series_py(*args)
        assert np.array_equal(q_nb, q_py)
        assert np.array_equal(v_nb, v_py)


def test_backend_reported():
    assert _kernels.BACKEND in ("numba", "numpy")
