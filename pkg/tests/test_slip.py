import pytest
from hypothesis import given
from hypothesis import strategies as st

from longctrl.core_types import ConfigError, VehicleParams
from longctrl.primitives import Table1D
from longctrl.slip import (SlipConfig, SlipState, blend_factor, contact_velocity, estimate,
                           velocity_from_front_wheels, wheel_slip)

from conftest import make_state

FLAT = SlipConfig(r_e_curve_front=Table1D.constant(0.29), r_e_curve_rear=Table1D.constant(0.31))


def test_contact_velocity_without_yaw():
    params = VehicleParams()
    assert all(contact_velocity(0.0, w, 25.0, params) == 25.0 for w in range(4))


def test_contact_velocity_yaw_offsets():
    params = VehicleParams()
    # positive yaw: left wheels on the inside
    assert contact_velocity(0.5, 0, 25.0, params) == pytest.approx(25.0 - 0.5 * 1.6 / 2)
    assert contact_velocity(0.5, 3, 25.0, params) == pytest.approx(25.0 + 0.5 * 1.55 / 2)


def test_wheel_slip_examples():
    assert wheel_slip(100.0, 29.0, 0.29, FLAT) == pytest.approx(0.0)
    assert wheel_slip(0.0, 20.0, 0.29, FLAT) == -1.0
    assert wheel_slip(50.0, 0.5, 0.29, FLAT) == 0.0
    with pytest.raises(ValueError):
        wheel_slip(-1.0, 20.0, 0.29, FLAT)


@given(omega=st.floats(0, 400), v=st.floats(1.0, 90))
def test_braking_slip_bounded_below(omega, v):
    assert wheel_slip(omega, v, 0.3, FLAT) >= -1.0


def test_front_wheel_velocity():
    omega = 25.0 / 0.29
    vs = make_state(wheel_speed=(omega, omega, 10.0, 10.0))
    assert velocity_from_front_wheels(vs, VehicleParams(), FLAT) == pytest.approx(25.0)
    vs = make_state(wheel_speed=(80.0, 90.0, 10.0, 10.0))
    assert velocity_from_front_wheels(vs, VehicleParams(), FLAT) == pytest.approx(85.0 * 0.29)


def test_blend_factor_examples():
    cfg = SlipConfig()
    assert blend_factor(5e5, 0.0, cfg) == 1.0
    assert blend_factor(0.0, -5.5, cfg) == pytest.approx(0.5, rel=1e-12)
    assert blend_factor(0.0, 0.0, cfg) == 0.0


@given(p=st.floats(0, 2e7), a=st.floats(-60, 30))
def test_blend_factor_in_unit_interval(p, a):
    assert 0.0 <= blend_factor(p, a, SlipConfig()) <= 1.0


@given(p1=st.floats(0, 1e6), dp=st.floats(0, 1e6), a=st.floats(-30, 10))
def test_blend_factor_monotone_in_pressure(p1, dp, a):
    cfg = SlipConfig()
    assert blend_factor(p1 + dp, a, cfg) >= blend_factor(p1, a, cfg)


def test_hard_braking_moves_blend_to_state_estimate():
    params = VehicleParams()
    state = SlipState()
    vs = make_state(v_est=30.0, wheel_speed=(80.0, 80.0, 90.0, 90.0), p_brake_meas_front=1e6,
                    a_x_meas=-12.0)
    for _ in range(400):
        _, v_blend = estimate(vs, 0.002, FLAT, params, state)
    assert state.k_filtered == pytest.approx(1.0, abs=1e-6)
    assert v_blend == pytest.approx(30.0, abs=1e-4)


def test_cruise_uses_front_wheels_and_zero_slip():
    params = VehicleParams()
    state = SlipState()
    omega = 30.0 / 0.29
    vs = make_state(v_est=31.0, wheel_speed=(omega, omega, 30.0 / 0.31, 30.0 / 0.31))
    for _ in range(100):
        slips, v_blend = estimate(vs, 0.002, FLAT, params, state)
    assert v_blend == pytest.approx(30.0)
    assert slips == pytest.approx((0.0, 0.0, 0.0, 0.0), abs=1e-12)


@given(k=st.floats(0, 1e6), v=st.floats(0, 80))
def test_blend_invariant_when_sources_agree(k, v):
    params = VehicleParams()
    omega = v / 0.29
    vs = make_state(v_est=v, wheel_speed=(omega, omega, omega, omega), p_brake_meas_front=k)
    _, v_blend = estimate(vs, 0.01, FLAT, params, SlipState())
    assert v_blend == pytest.approx(v, abs=1e-9)


def test_slip_config_validation():
    with pytest.raises(ConfigError):
        SlipConfig(v_min_denominator=0.0)
    with pytest.raises(ConfigError):
        SlipConfig(r_e_curve_front=Table1D.constant(0.0))
