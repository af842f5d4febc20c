import copy
import functools
import time

import pytest

from longctrl.core_types import VehicleParams, VehicleState
from longctrl.runner import run_scenario, scenario_from_dict
from longctrl.scenarios import builtin_names, load_scenario_dict


def make_state(**overrides) -> VehicleState:
    base = dict(t=0.0, v_est=20.0, a_x_meas=0.0, a_y_meas=0.0, yaw_rate=0.0,
                wheel_speed=(60.0, 60.0, 60.0, 60.0), engine_speed=6000.0, gear_engaged=3,
                p_brake_meas_front=0.0, p_brake_meas_rear=0.0, throttle_meas=0.0,
                disc_temp_front=300.0, disc_temp_rear=300.0, lap_count=0)
    base.update(overrides)
    return VehicleState(**base)


def round_params(**overrides) -> VehicleParams:
    """Parameters with round numbers used by the hand-computed examples."""
    base = dict(m=800.0, J_drivetrain=9.0, r_wheel_front=0.3, r_wheel_rear=0.3,
                gear_ratios=(3.0, 2.0, 1.5, 1.2), tau_final_drive=3.0, eta_drivetrain=0.9,
                d_bore=0.04, mu_brake=0.45, r_lever=0.15)
    base.update(overrides)
    return VehicleParams(**base)


# wall-clock seconds of each cached run, keyed like the cache
RUN_SECONDS: dict[tuple[str, str], float] = {}


@functools.lru_cache(maxsize=None)
def _run_cached(name: str, patch_key: str):
    data, base_dir = load_scenario_dict(name)
    data = copy.deepcopy(data)
    for section, key, value in _PATCHES[patch_key]:
        data.setdefault(section, {})[key] = value
    start = time.perf_counter()
    result = run_scenario(scenario_from_dict(data, base_dir))
    RUN_SECONDS[(name, patch_key)] = time.perf_counter() - start
    return result


_PATCHES = {
    "": (),
    "no_abs": (("abs", "enabled", False),),
    "no_tc": (("tc", "enabled", False),),
}


@pytest.fixture(scope="session")
def scenario_run():
    """``scenario_run(name, variant="")`` -> (log, metrics), cached per session."""
    def run(name: str, variant: str = ""):
        return _run_cached(name, variant)
    return run


@pytest.fixture(scope="session")
def all_builtin_logs(scenario_run):
    return {name: scenario_run(name) for name in builtin_names()}
