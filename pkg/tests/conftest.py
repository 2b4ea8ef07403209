import numpy as np
import pytest

from servosim import ActuatorParams, simulate_tracking
from servosim.fileio import PRESET_FAMILIES, load_preset


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    # trigger JIT compilation once so per-test runtime stays honest
    simulate_tracking(np.zeros(3), 1e-3, load_preset("XC330"), kp=1.0)


@pytest.fixture(scope="session")
def xc330() -> ActuatorParams:
    return load_preset("XC330")


@pytest.fixture(scope="session")
def all_presets() -> dict:
    return {family: load_preset(family) for family in PRESET_FAMILIES}
