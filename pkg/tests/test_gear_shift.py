import pytest
from hypothesis import given
from hypothesis import strategies as st

from longctrl.core_types import (ConfigError, InvalidGearError, Trajectory, TrajectoryPoint,
                                 VehicleParams, engine_speed_from_velocity)
from longctrl.gear_shift import (GearShiftConfig, GearShiftState, decide_gear,
                                 early_downshift_due, find_downshift_time, predict_engine_speed)

from conftest import make_state

PARAMS = VehicleParams()


def _traj(points):
    return Trajectory(tuple(TrajectoryPoint(t, v, a_y_planned=ay) for t, v, ay in points))


def _rpm(v, gear):
    return engine_speed_from_velocity(v, gear, PARAMS)


def test_constant_velocity_gives_constant_rpm():
    series = predict_engine_speed(_traj([(0.1 * i, 40.0, 0.0) for i in range(5)]), 4, PARAMS)
    assert len({rpm for _, rpm in series}) == 1


def test_predict_rejects_empty_and_invalid_gear():
    with pytest.raises(ValueError):
        predict_engine_speed(Trajectory(()), 3, PARAMS)
    with pytest.raises(InvalidGearError):
        predict_engine_speed(_traj([(0.0, 10.0, 0.0)]), 9, PARAMS)


def test_find_downshift_time():
    assert find_downshift_time([(0.0, 7000.0), (0.5, 6000.0)], 5000.0) is None
    assert find_downshift_time([(0.0, 7000.0), (0.5, 4900.0), (0.6, 4000.0)], 5000.0) == 0.5


def _vs(v, gear, ay=0.0, t=10.0):
    return make_state(t=t, v_est=v, engine_speed=_rpm(v, gear), gear_engaged=gear, a_y_meas=ay)


def test_straight_mid_band_holds_gear():
    state = GearShiftState(4)
    traj = _traj([(0.1 * i, 40.0, 0.0) for i in range(30)])
    assert decide_gear(state, _vs(40.0, 4), traj, GearShiftConfig(), PARAMS) == 4


def test_rpm_thresholds_shift():
    cfg = GearShiftConfig(predictive=False)
    v_high = 8900.0 / _rpm(1.0, 3)
    assert decide_gear(GearShiftState(3), _vs(v_high, 3), None, cfg, PARAMS) == 4
    v_low = 4900.0 / _rpm(1.0, 3)
    assert decide_gear(GearShiftState(3), _vs(v_low, 3), None, cfg, PARAMS) == 2


def test_lateral_limit_blocks_shifts_in_predictive_mode():
    v_low = 4900.0 / _rpm(1.0, 3)
    assert decide_gear(GearShiftState(3), _vs(v_low, 3, ay=15.0), None, GearShiftConfig(),
                       PARAMS) == 3
    # conventional mode ignores lateral acceleration
    assert decide_gear(GearShiftState(3), _vs(v_low, 3, ay=15.0), None,
                       GearShiftConfig(predictive=False), PARAMS) == 2


def test_overrev_blocks_downshift():
    cfg = GearShiftConfig(upshift_rpm=6000.0, overrev_block_rpm=6500.0)
    v = 5000.0 / _rpm(1.0, 2) * 0.99
    assert _rpm(v, 1) > cfg.overrev_block_rpm
    assert decide_gear(GearShiftState(2), _vs(v, 2), None, cfg, PARAMS) == 2


def test_min_shift_interval():
    cfg = GearShiftConfig(predictive=False)
    state = GearShiftState(3, last_shift_time=9.9)
    v_low = 4900.0 / _rpm(1.0, 3)
    assert decide_gear(state, _vs(v_low, 3), None, cfg, PARAMS) == 3


def _corner_preview(v0, v_corner, ay, t_corner):
    pts = []
    for i in range(31):
        t = 0.1 * i
        inside = t >= t_corner
        v = v_corner if inside else v0 + (v_corner - v0) * t / t_corner
        pts.append((t, v, ay if inside or t >= 0.3 else 0.0))
    return _traj(pts)


def test_early_downshift_before_corner():
    # gear 3 needed below 5000 rpm once inside the corner
    v_corner = 4800.0 / _rpm(1.0, 3)
    v0 = 5600.0 / _rpm(1.0, 3)
    traj = _corner_preview(v0, v_corner, 15.0, 1.0)
    cfg = GearShiftConfig()
    assert early_downshift_due(traj, 3, v0, cfg, PARAMS)
    assert decide_gear(GearShiftState(3), _vs(v0, 3), traj, cfg, PARAMS) == 2
    # a mild corner the car can still shift in: no early shift
    assert not early_downshift_due(_corner_preview(v0, v_corner, 2.0, 1.0), 3, v0, cfg, PARAMS)
    assert decide_gear(GearShiftState(3), _vs(v0, 3), traj,
                       GearShiftConfig(predictive=False), PARAMS) == 3


def test_all_rpm_above_limit_means_no_early_shift():
    traj = _traj([(0.1 * i, 50.0, 20.0) for i in range(30)])
    assert not early_downshift_due(traj, 3, 50.0, GearShiftConfig(), PARAMS)


@given(v=st.floats(0, 90), ay=st.floats(-30, 30), gear=st.integers(1, 6),
       predictive=st.booleans())
def test_single_step_changes(v, ay, gear, predictive):
    cfg = GearShiftConfig(predictive=predictive)
    new = decide_gear(GearShiftState(gear), _vs(v, gear, ay), None, cfg, PARAMS)
    assert abs(new - gear) <= 1 and 1 <= new <= PARAMS.n_gears
    if predictive and abs(ay) > cfg.ay_limit(v):
        assert new == gear
    if new < gear:
        assert _rpm(v, new) <= cfg.overrev_block_rpm


def test_config_validation():
    with pytest.raises(ConfigError):
        GearShiftConfig(downshift_rpm=9000.0)
    with pytest.raises(ConfigError):
        GearShiftConfig(horizon_length=0.0)
    assert GearShiftConfig().ay_limit(30.0) == pytest.approx(10.0)
