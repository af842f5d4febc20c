import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from longctrl.core_types import (ActuationCommand, AccelCommand, ConfigError, InvalidGearError,
                                 Trajectory, TrajectoryPoint, VehicleParams,
                                 engine_speed_from_velocity, vehicle_params_from_dict)

from conftest import make_state, round_params


def test_zero_velocity_gives_zero_rpm():
    assert engine_speed_from_velocity(0.0, 1, VehicleParams()) == 0.0


def test_rpm_hand_value():
    # tau_gb = 2 is gear 2 of the round parameter set; v / r * 6 * 60 / (2 pi)
    params = round_params()
    assert engine_speed_from_velocity(31.416, 2, params) == pytest.approx(6000.01403060998,
                                                                          rel=1e-12)
    assert engine_speed_from_velocity(10 * math.pi, 2, params) == pytest.approx(6000.0,
                                                                               rel=1e-12)


def test_rpm_doubles_with_velocity():
    params = VehicleParams()
    assert engine_speed_from_velocity(40.0, 3, params) == pytest.approx(
        2 * engine_speed_from_velocity(20.0, 3, params))


@pytest.mark.parametrize("gear", [0, 7, -1, 2.5, True])
def test_invalid_gear(gear):
    with pytest.raises(InvalidGearError):
        engine_speed_from_velocity(10.0, gear, VehicleParams())


def test_negative_velocity_rejected():
    with pytest.raises(ValueError):
        engine_speed_from_velocity(-1.0, 1, VehicleParams())


@given(v1=st.floats(0, 100), dv=st.floats(1e-3, 50), gear=st.integers(1, 6))
def test_rpm_strictly_increasing_in_v(v1, dv, gear):
    params = VehicleParams()
    assert engine_speed_from_velocity(v1 + dv, gear, params) > engine_speed_from_velocity(
        v1, gear, params)


@given(v=st.floats(0.1, 100), gear=st.integers(2, 6))
def test_rpm_increasing_in_ratio(v, gear):
    # lower gears have larger total ratio
    params = VehicleParams()
    assert engine_speed_from_velocity(v, gear - 1, params) > engine_speed_from_velocity(
        v, gear, params)


@pytest.mark.parametrize("field,value", [
    ("m", 0.0), ("m", -5.0), ("eta_drivetrain", 1.2), ("brake_bias_front", 1.0),
    ("brake_bias_front", 0.0), ("gear_ratios", (2.0, 2.5)), ("gear_ratios", ()),
    ("c_d_A", float("nan")), ("upshift_rpm", 4000.0), ("cog_to_front", 5.0),
])
def test_vehicle_params_rejects_invalid(field, value):
    with pytest.raises(ConfigError) as exc:
        VehicleParams(**{field: value})
    assert exc.value.path.startswith("vehicle.")


def test_vehicle_params_from_dict_unknown_key():
    with pytest.raises(ConfigError, match="unknown"):
        vehicle_params_from_dict({"mass": 700})
    assert vehicle_params_from_dict({"gear_ratios": [3.0, 2.0]}).n_gears == 2


def test_vehicle_state_invariants():
    with pytest.raises(ValueError):
        make_state(wheel_speed=(1.0, -1.0, 1.0, 1.0))
    with pytest.raises(ValueError):
        make_state(p_brake_meas_front=-1.0)
    with pytest.raises(ValueError):
        make_state(throttle_meas=1.5)
    with pytest.raises(ValueError):
        make_state(gear_engaged=-1)
    with pytest.raises(ValueError):
        make_state(wheel_speed=(1.0, 1.0, 1.0))


def test_commands_reject_invalid_values():
    with pytest.raises(ValueError):
        ActuationCommand(-0.1, 0.0, 0.0, 1)
    with pytest.raises(ValueError):
        ActuationCommand(0.5, -1.0, 0.0, 1)
    with pytest.raises(ValueError):
        AccelCommand(math.inf)
    cmd = ActuationCommand(0.5, 2e7, 0.0, 1)
    with pytest.raises(ValueError, match="hydraulic maximum"):
        cmd.check_limits(VehicleParams())


def test_trajectory_requires_increasing_offsets():
    with pytest.raises(ValueError):
        Trajectory((TrajectoryPoint(0.0, 10.0), TrajectoryPoint(0.0, 10.0)))
    with pytest.raises(ValueError):
        TrajectoryPoint(0.0, -1.0)
    assert len(Trajectory((TrajectoryPoint(0.0, 1.0), TrajectoryPoint(0.1, 1.0)))) == 2


def test_axle_loads_sum_to_weight():
    p = VehicleParams()
    front, rear = p.static_axle_loads()
    assert front + rear == pytest.approx(p.m * p.g)
    assert p.m_equivalent == pytest.approx(p.m + p.J_drivetrain / p.r_wheel_rear ** 2)
