"""Fixed-step longitudinal vehicle and drivetrain simulator.

Used as the closed-loop verification plant. Models a turbo-lagged engine with
drag torque, a sequential gearbox with torque cut while shifting, a slipping
launch clutch below ``clutch_rpm``, axle-lumped wheels on a simplified Magic
Formula tire with aero load and load transfer, first-order-plus-deadtime brake
hydraulics and a lumped disc thermal model.

Integration is explicit Euler except the wheel speeds, which use a linearised
backward step on the tire force so locked and slow-rolling wheels stay stable
at 1 kHz.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core_types import (RAD_S_TO_RPM, ActuationCommand, ConfigError, VehicleParams,
                         VehicleState)
from .engine_maps import plant_torque_map
from .primitives import Table1D, Table2D


def _rolling_radius(r: float) -> Table1D:
    return Table1D((0.0, 30.0, 60.0, 90.0), (r, r + 0.002, r + 0.005, r + 0.008))


@dataclass(frozen=True)
class TireConfig:
    B: float = 12.0
    C: float = 1.6
    mu_road: float = 1.5

    def __post_init__(self):
        if self.B <= 0 or self.C <= 0 or self.mu_road <= 0:
            raise ConfigError("B, C and mu_road must be > 0", "plant.tire")


@dataclass(frozen=True)
class PlantConfig:
    dt: float = 1e-3
    engine_torque_map: Table2D = field(default_factory=plant_torque_map)
    engine_torque_scale: float = 1.0
    tau_turbo_rise: float = 0.6
    tau_turbo_fall: float = 0.1
    shift_cut_duration: float = 0.05
    clutch_rpm: float = 2000.0
    tire_front: TireConfig = field(default_factory=TireConfig)
    tire_rear: TireConfig = field(default_factory=TireConfig)
    aero_balance_front: float = 0.45
    h_cog: float = 0.3
    J_wheel_front: float = 1.0
    r_e_curve_front: Table1D = field(default_factory=lambda: _rolling_radius(0.29))
    r_e_curve_rear: Table1D = field(default_factory=lambda: _rolling_radius(0.31))
    v_slip_min: float = 1.0
    brake_tau: float = 0.05
    brake_deadtime: float = 0.03
    heat_coeff: float = 3.3e-4
    disc_heat_capacity: float = 2000.0
    cool_c0: float = 2.0
    cool_c1: float = 0.15
    ambient: float = 25.0
    lap_length: float = 1500.0
    noise_v: float = 0.0
    noise_ax: float = 0.0
    noise_ay: float = 0.0
    noise_wheel: float = 0.0
    noise_pressure: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("must be > 0", "plant.dt")
        for name in ("tau_turbo_rise", "tau_turbo_fall", "brake_tau", "disc_heat_capacity",
                     "J_wheel_front", "lap_length", "v_slip_min"):
            if not getattr(self, name) > 0:
                raise ConfigError("must be > 0", f"plant.{name}")
        for name in ("brake_deadtime", "shift_cut_duration", "heat_coeff", "cool_c0", "cool_c1",
                     "h_cog", "noise_v", "noise_ax", "noise_ay", "noise_wheel",
                     "noise_pressure"):
            if getattr(self, name) < 0:
                raise ConfigError("must be >= 0", f"plant.{name}")
        if not 0.0 <= self.aero_balance_front <= 1.0:
            raise ConfigError("must lie in [0, 1]", "plant.aero_balance_front")


@dataclass
class PlantState:
    v: float
    gear: int
    omega_front: float = 0.0
    omega_rear: float = 0.0
    torque_actual: float = 0.0
    p_actual_front: float = 0.0
    p_actual_rear: float = 0.0
    delay_front: deque = field(default_factory=deque)
    delay_rear: deque = field(default_factory=deque)
    disc_temp_front: float = 25.0
    disc_temp_rear: float = 25.0
    pending_gear: int = 0
    shift_timer: float = 0.0
    distance: float = 0.0
    lap_count: int = 0
    t: float = 0.0
    # t is derived from the step count so it does not drift
    steps: int = 0
    a_x: float = 0.0
    a_y: float = 0.0
    throttle: float = 0.0
    engine_speed: float = 0.0
    kappa_front: float = 0.0
    kappa_rear: float = 0.0
    fz_front: float = 0.0
    fz_rear: float = 0.0
    force_front: float = 0.0
    force_rear: float = 0.0


def tire_force(kappa: float, F_z: float, tire: TireConfig) -> float:
    """Longitudinal tire force, simplified Magic Formula."""
    if F_z < 0:
        raise ValueError("F_z must be >= 0")
    return tire.mu_road * F_z * math.sin(tire.C * math.atan(tire.B * kappa))


def _tire_force_slope(kappa: float, F_z: float, tire: TireConfig) -> float:
    bk = tire.B * kappa
    return tire.mu_road * F_z * math.cos(tire.C * math.atan(bk)) * tire.C * tire.B / (1 + bk * bk)


def plant_slip(omega: float, v: float, r_e: float, v_min: float) -> float:
    return (omega * r_e - v) / max(v, v_min)


def disc_thermal_step(temp: float, pressure: float, omega: float, v: float, dt: float,
                      cfg: PlantConfig) -> float:
    heating = cfg.heat_coeff * pressure * omega
    cooling = (cfg.cool_c0 + cfg.cool_c1 * v) * (temp - cfg.ambient)
    return temp + dt * (heating - cooling) / cfg.disc_heat_capacity


def initial_state(v0: float, gear: int, params: VehicleParams, cfg: PlantConfig,
                  disc_temp: float | None = None, throttle: float = 0.0) -> PlantState:
    """Rolling start at ``v0`` with zero slip and brakes released."""
    params.ratio(gear)
    temp = cfg.ambient if disc_temp is None else disc_temp
    st = PlantState(v=v0, gear=gear, disc_temp_front=temp, disc_temp_rear=temp,
                    pending_gear=gear, throttle=throttle)
    st.omega_front = v0 / cfg.r_e_curve_front(v0)
    st.omega_rear = v0 / cfg.r_e_curve_rear(v0)
    n = int(round(cfg.brake_deadtime / cfg.dt))
    st.delay_front = deque([0.0] * n)
    st.delay_rear = deque([0.0] * n)
    st.fz_front, st.fz_rear = params.static_axle_loads()
    st.engine_speed = max(st.omega_rear * params.total_ratio(gear) * RAD_S_TO_RPM,
                          cfg.clutch_rpm)
    st.torque_actual = cfg.engine_torque_scale * cfg.engine_torque_map(throttle,
                                                                       st.engine_speed)
    return st


def _advance_gearbox(cmd_gear: int, dt: float, cfg: PlantConfig, params: VehicleParams,
                     st: PlantState) -> bool:
    """Step the shift state machine; returns True while torque is cut."""
    if st.shift_timer > 0.0:
        st.shift_timer -= dt
        if st.shift_timer <= 1e-12:
            st.shift_timer = 0.0
            st.gear = st.pending_gear
            return False
        return True
    if cmd_gear != st.gear and 1 <= cmd_gear <= params.n_gears:
        st.pending_gear = st.gear + (1 if cmd_gear > st.gear else -1)
        if cfg.shift_cut_duration <= 0.0:
            st.gear = st.pending_gear
            return False
        st.shift_timer = cfg.shift_cut_duration
        return True
    return False


def _hydraulics(command: float, buf: deque, p: float, dt: float, cfg: PlantConfig) -> float:
    if buf.maxlen is None and len(buf) == 0:
        delayed = command
    else:
        buf.append(command)
        delayed = buf.popleft()
    return p + dt / cfg.brake_tau * (delayed - p)


def _wheel_update(omega: float, inertia: float, torque: float, brake_torque: float,
                  v: float, fz: float, r_e: float, tire: TireConfig, dt: float,
                  v_min: float) -> tuple[float, float, float]:
    den = max(v, v_min)
    kappa = (omega * r_e - v) / den
    force = tire_force(kappa, fz, tire)
    slope = max(_tire_force_slope(kappa, fz, tire), 0.0) * r_e / den
    net = torque - brake_torque - r_e * force
    omega_new = omega + dt * net / (inertia + dt * r_e * slope)
    if omega_new < 0.0:
        omega_new = 0.0
    kappa_new = (omega_new * r_e - v) / den
    return omega_new, kappa_new, tire_force(kappa_new, fz, tire)


def plant_step(cmd: ActuationCommand, dt: float, cfg: PlantConfig, params: VehicleParams,
               st: PlantState, rng: np.random.Generator | None = None,
               lateral_accel: float = 0.0) -> VehicleState:
    """Advance the plant by ``dt`` under ``cmd`` and return the measured snapshot.

    ``lateral_accel`` is the prescribed lateral acceleration at this instant;
    it only feeds the yaw-rate kinematics and the measurement.
    """
    if abs(dt - cfg.dt) > 1e-12:
        raise ValueError(f"plant is configured for dt={cfg.dt}, got {dt}")
    v = st.v

    # gearbox and engine
    cut = _advance_gearbox(cmd.gear_request, dt, cfg, params, st)
    ratio = params.total_ratio(st.gear)
    wheel_rpm = st.omega_rear * ratio * RAD_S_TO_RPM
    slipping = wheel_rpm < cfg.clutch_rpm
    rpm = cfg.clutch_rpm if slipping else wheel_rpm
    throttle = cmd.throttle if rpm < params.rev_limit else 0.0
    torque_target = cfg.engine_torque_scale * cfg.engine_torque_map(throttle, rpm)
    tau = cfg.tau_turbo_rise if torque_target > st.torque_actual else cfg.tau_turbo_fall
    st.torque_actual += dt / tau * (torque_target - st.torque_actual)
    engine_torque = st.torque_actual
    if cut or (slipping and engine_torque < 0.0):
        engine_torque = 0.0
    wheel_torque = engine_torque * ratio
    if wheel_torque > 0.0:
        wheel_torque *= params.eta_drivetrain

    # brakes
    st.p_actual_front = _hydraulics(cmd.p_brake_target_front, st.delay_front,
                                    st.p_actual_front, dt, cfg)
    st.p_actual_rear = _hydraulics(cmd.p_brake_target_rear, st.delay_rear,
                                   st.p_actual_rear, dt, cfg)
    gain = params.brake_gain
    tb_front = gain * st.p_actual_front
    tb_rear = gain * st.p_actual_rear

    # vertical loads
    f_down = 0.5 * params.rho_air * params.c_l_A * v * v
    fz_f0, fz_r0 = params.static_axle_loads()
    transfer = params.m * st.a_x * cfg.h_cog / params.wheelbase
    fz_f = max(fz_f0 + cfg.aero_balance_front * f_down - transfer, 0.0)
    fz_r = max(fz_r0 + (1.0 - cfg.aero_balance_front) * f_down + transfer, 0.0)

    # wheels
    r_f = cfg.r_e_curve_front(v)
    r_r = cfg.r_e_curve_rear(v)
    st.omega_front, st.kappa_front, f_front = _wheel_update(
        st.omega_front, 2.0 * cfg.J_wheel_front, 0.0, tb_front, v, fz_f, r_f,
        cfg.tire_front, dt, cfg.v_slip_min)
    st.omega_rear, st.kappa_rear, f_rear = _wheel_update(
        st.omega_rear, params.J_drivetrain, wheel_torque, tb_rear, v, fz_r, r_r,
        cfg.tire_rear, dt, cfg.v_slip_min)

    # chassis
    f_aero = 0.5 * params.rho_air * params.c_d_A * v * v
    f_roll = params.c_rr * params.m * params.g if v > 0.0 else 0.0
    a_x = (f_front + f_rear - f_aero - f_roll) / params.m
    v_new = v + dt * a_x
    if v_new < 0.0:
        v_new = 0.0
        a_x = -v / dt
    st.distance += 0.5 * (v + v_new) * dt
    st.v = v_new
    st.a_x = a_x
    st.a_y = lateral_accel
    st.steps += 1
    st.t = st.steps * dt
    st.lap_count = int(st.distance // cfg.lap_length)
    st.throttle = cmd.throttle
    st.fz_front, st.fz_rear = fz_f, fz_r
    st.force_front, st.force_rear = f_front, f_rear

    st.disc_temp_front = disc_thermal_step(st.disc_temp_front, st.p_actual_front,
                                           st.omega_front, v_new, dt, cfg)
    st.disc_temp_rear = disc_thermal_step(st.disc_temp_rear, st.p_actual_rear,
                                          st.omega_rear, v_new, dt, cfg)

    wheel_rpm = st.omega_rear * params.total_ratio(st.gear) * RAD_S_TO_RPM
    st.engine_speed = max(wheel_rpm, cfg.clutch_rpm)
    return measure(st, cfg, params, rng)


def measure(st: PlantState, cfg: PlantConfig, params: VehicleParams,
            rng: np.random.Generator | None = None) -> VehicleState:
    """Sensor snapshot of the current plant state, with optional seeded noise."""
    v = st.v
    yaw_rate = st.a_y / v if v > 1.0 else 0.0
    omegas = []
    for axle_omega, track in ((st.omega_front, params.track_front),
                              (st.omega_front, params.track_front),
                              (st.omega_rear, params.track_rear),
                              (st.omega_rear, params.track_rear)):
        omegas.append(axle_omega)
    if v > 1.0:
        half_f = yaw_rate * params.track_front / 2.0
        half_r = yaw_rate * params.track_rear / 2.0
        omegas[0] *= (v - half_f) / v
        omegas[1] *= (v + half_f) / v
        omegas[2] *= (v - half_r) / v
        omegas[3] *= (v + half_r) / v

    v_est, a_x, a_y = v, st.a_x, st.a_y
    p_f, p_r = st.p_actual_front, st.p_actual_rear
    if rng is not None:
        if cfg.noise_v:
            v_est += rng.normal(0.0, cfg.noise_v)
        if cfg.noise_ax:
            a_x += rng.normal(0.0, cfg.noise_ax)
        if cfg.noise_ay:
            a_y += rng.normal(0.0, cfg.noise_ay)
        if cfg.noise_wheel:
            omegas = [w + rng.normal(0.0, cfg.noise_wheel) for w in omegas]
        if cfg.noise_pressure:
            p_f += rng.normal(0.0, cfg.noise_pressure)
            p_r += rng.normal(0.0, cfg.noise_pressure)

    return VehicleState(
        t=st.t,
        v_est=max(v_est, 0.0),
        a_x_meas=a_x,
        a_y_meas=a_y,
        yaw_rate=yaw_rate,
        wheel_speed=tuple(max(w, 0.0) for w in omegas),
        engine_speed=st.engine_speed,
        gear_engaged=st.gear,
        p_brake_meas_front=max(p_f, 0.0),
        p_brake_meas_rear=max(p_r, 0.0),
        throttle_meas=min(max(st.throttle, 0.0), 1.0),
        disc_temp_front=st.disc_temp_front,
        disc_temp_rear=st.disc_temp_rear,
        lap_count=st.lap_count,
    )
