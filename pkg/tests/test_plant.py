import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from longctrl.core_types import ActuationCommand, ConfigError, VehicleParams
from longctrl.plant import (PlantConfig, TireConfig, disc_thermal_step, initial_state,
                            plant_step, tire_force)

PARAMS = VehicleParams()

# root-found offline (scipy brentq on the tire curve, then on the engine map) for
# v = 40 m/s in 4th gear: rear slip 0.0063702, engine 5231.84 rpm, 86.07 N*m
CRUISE_THROTTLE = 0.12444059299498914


def _run(cmd, n, cfg=None, v0=30.0, gear=4, throttle=0.0, **kw):
    cfg = cfg or PlantConfig()
    st_ = initial_state(v0, gear, PARAMS, cfg, throttle=throttle, **kw)
    out = [plant_step(cmd, cfg.dt, cfg, PARAMS, st_) for _ in range(n)]
    return st_, out


def test_tire_force_examples():
    tire = TireConfig()
    assert tire_force(0.0, 4000.0, tire) == 0.0
    assert tire_force(1e9, 4000.0, tire) == pytest.approx(3526.7115137548394, rel=1e-9)
    with pytest.raises(ValueError):
        tire_force(0.1, -1.0, tire)


@given(k=st.floats(-5, 5), fz=st.floats(0, 1e4))
def test_tire_force_odd_and_bounded(k, fz):
    tire = TireConfig()
    assert tire_force(-k, fz, tire) == pytest.approx(-tire_force(k, fz, tire), abs=1e-9)
    assert abs(tire_force(k, fz, tire)) <= tire.mu_road * fz + 1e-9


def test_coast_down_decelerates():
    _, out = _run(ActuationCommand(0.0, 0.0, 0.0, 4), 10)
    assert out[-1].a_x_meas < 0.0 and out[-1].v_est < 30.0


def test_steady_cruise_equilibrium():
    _, out = _run(ActuationCommand(CRUISE_THROTTLE, 0.0, 0.0, 4), 3000, v0=40.0,
                  throttle=CRUISE_THROTTLE)
    assert abs(out[-1].a_x_meas) < 1e-3
    assert out[-1].v_est == pytest.approx(40.0, abs=0.05)


def test_brake_first_order_plus_deadtime():
    cfg = PlantConfig()
    p_step = 1e6
    st_, _ = _run(ActuationCommand(0.0, p_step, p_step, 4), 80, cfg)
    # 30 samples of delay, then 50 Euler steps of a 50 ms lag
    assert st_.p_actual_front / p_step == pytest.approx(1 - (1 - 0.001 / 0.05) ** 50, rel=1e-9)
    assert st_.p_actual_front / p_step == pytest.approx(1 - math.exp(-1), abs=0.005)
    st_, _ = _run(ActuationCommand(0.0, p_step, p_step, 4), 30, cfg)
    assert st_.p_actual_front == 0.0


def test_disc_cools_without_pressure():
    cfg = PlantConfig()
    assert disc_thermal_step(300.0, 0.0, 100.0, 30.0, 0.01, cfg) < 300.0
    assert disc_thermal_step(cfg.ambient, 0.0, 100.0, 30.0, 0.01, cfg) == cfg.ambient


def test_disc_heats_linearly_without_cooling():
    cfg = PlantConfig(cool_c0=0.0, cool_c1=0.0)
    temps = [100.0]
    for _ in range(10):
        temps.append(disc_thermal_step(temps[-1], 1e6, 100.0, 30.0, 0.01, cfg))
    steps = np.diff(temps)
    np.testing.assert_allclose(steps, cfg.heat_coeff * 1e6 * 100.0 * 0.01 / cfg.disc_heat_capacity)


def test_shift_cuts_torque_then_engages():
    cfg = PlantConfig()
    st_, out = _run(ActuationCommand(0.5, 0.0, 0.0, 5), 40, cfg)
    assert out[0].gear_engaged == 4
    assert st_.gear == 4 and st_.shift_timer > 0
    _, out = _run(ActuationCommand(0.5, 0.0, 0.0, 5), 60, cfg)
    assert out[-1].gear_engaged == 5


def test_launch_clutch_holds_rpm():
    _, out = _run(ActuationCommand(1.0, 0.0, 0.0, 1), 200, v0=0.0, gear=1)
    assert all(s.engine_speed >= 2000.0 for s in out)
    assert out[-1].v_est > 0.0


def test_full_brake_never_reverses():
    _, out = _run(ActuationCommand(0.0, 1.5e7, 1.5e7, 2), 4000, v0=10.0, gear=2)
    assert all(s.v_est >= 0.0 for s in out)
    assert all(min(s.wheel_speed) >= 0.0 for s in out)
    assert out[-1].v_est == 0.0


def test_lap_counting():
    cfg = PlantConfig(lap_length=10.0)
    st_, _ = _run(ActuationCommand(0.0, 0.0, 0.0, 4), 1000, cfg)
    assert st_.lap_count == int(st_.distance // 10.0) >= 2


def test_dt_mismatch_rejected():
    cfg = PlantConfig()
    st_ = initial_state(10.0, 2, PARAMS, cfg)
    with pytest.raises(ValueError):
        plant_step(ActuationCommand(0.0, 0.0, 0.0, 2), 0.002, cfg, PARAMS, st_)


def test_noise_is_seeded():
    cfg = PlantConfig(noise_v=0.1, noise_ax=0.2)
    a = plant_step(ActuationCommand(0.0, 0.0, 0.0, 4), cfg.dt, cfg, PARAMS,
                   initial_state(30.0, 4, PARAMS, cfg), np.random.default_rng(1))
    b = plant_step(ActuationCommand(0.0, 0.0, 0.0, 4), cfg.dt, cfg, PARAMS,
                   initial_state(30.0, 4, PARAMS, cfg), np.random.default_rng(1))
    assert a == b


def test_config_validation():
    with pytest.raises(ConfigError):
        PlantConfig(dt=0.0)
    with pytest.raises(ConfigError):
        PlantConfig(noise_v=-1.0)
    with pytest.raises(ConfigError):
        TireConfig(mu_road=0.0)
