"""Longitudinal force target -> throttle or per-axle brake pressure.

Positive force goes through the drivetrain (torque target, inverse engine map,
throttle trim). Negative force beyond what the closed-throttle engine drag
already provides goes to the brakes, split by the front brake bias with the
rear share reduced by the drag force. A band around the drag equilibrium is
left to the engine alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .brake_warmup import merge_warmup
from .core_types import ConfigError, VehicleParams, VehicleState
from .primitives import PidConfig, PidState, Table1D, Table2D, pid_step


class ForceMode(str, Enum):
    DRIVE = "drive"
    COAST = "coast"
    BRAKE = "brake"


@dataclass(frozen=True)
class EngineCharacteristics:
    """Controller-side static engine model.

    ``throttle_map`` is the inverse map (torque N*m, rpm) -> throttle,
    ``drag_torque_curve`` the closed-throttle drag magnitude over rpm.
    """

    throttle_map: Table2D
    drag_torque_curve: Table1D
    torque_max_curve: Table1D

    def __post_init__(self):
        if any(v < 0.0 or v > 1.0 for row in self.throttle_map.z for v in row):
            raise ConfigError("throttle values must lie in [0, 1]", "engine.throttle_map")
        if any(v < 0.0 for v in self.drag_torque_curve.y):
            raise ConfigError("drag torque must be >= 0", "engine.drag_torque_curve")

    def zero_torque_throttle(self, rpm: float) -> float:
        return self.throttle_map(0.0, rpm)


def _default_trim() -> PidConfig:
    return PidConfig(kp=0.004, ki=0.02, out_min=-0.1, out_max=0.1)


@dataclass(frozen=True)
class ForceCtrlConfig:
    throttle_pid: PidConfig = field(default_factory=_default_trim)
    coast_band: float = 250.0
    mode_hysteresis: float = 50.0
    stall_guard_rpm: float = 1500.0
    stall_min_torque: float = 0.0

    def __post_init__(self):
        if self.coast_band < 0:
            raise ConfigError("must be >= 0", "force_controller.coast_band")
        if self.mode_hysteresis < 0:
            raise ConfigError("must be >= 0", "force_controller.mode_hysteresis")


def motor_torque_target(F_x_target: float, gear: int, params: VehicleParams,
                        engine_speed: float | None = None,
                        maps: EngineCharacteristics | None = None,
                        cfg: ForceCtrlConfig | None = None) -> float:
    """Engine torque for a wheel force; guards apply when rpm and maps are given.

    The lower clamp is the closed-throttle drag torque, so small negative
    demands are served by partial throttle instead of being rounded up to 0.
    """
    ratio = params.total_ratio(gear)
    torque = params.r_wheel_rear / (ratio * params.eta_drivetrain) * F_x_target
    if engine_speed is None or maps is None:
        return torque
    cfg = cfg or ForceCtrlConfig()
    lo = -maps.drag_torque_curve(engine_speed)
    hi = maps.torque_max_curve(engine_speed)
    torque = min(max(torque, lo), hi)
    if engine_speed < cfg.stall_guard_rpm:
        torque = max(torque, cfg.stall_min_torque)
    if engine_speed > params.rev_limit:
        torque = min(torque, 0.0)
    return torque


@dataclass
class ForceCtrlState:
    trim: PidState = field(default_factory=PidState)
    mode: ForceMode = ForceMode.COAST
    last_trim: float = 0.0


def throttle_from_torque(T_target: float, engine_speed: float, a_x_target: float,
                         a_x_meas: float, dt: float, cfg: ForceCtrlConfig,
                         maps: EngineCharacteristics, state: ForceCtrlState) -> float:
    base = maps.throttle_map(T_target, engine_speed)
    error = a_x_target - a_x_meas
    saturated = ((base + state.last_trim >= 1.0 and error > 0)
                 or (base + state.last_trim <= 0.0 and error < 0))
    trim = pid_step(state.trim, cfg.throttle_pid, error, dt, integrate=not saturated)
    state.last_trim = trim
    return min(max(base + trim, 0.0), 1.0)


def drag_brake_force(engine_speed: float, gear: int, throttle: float,
                     params: VehicleParams, maps: EngineCharacteristics) -> float:
    """Braking force at the rear wheels from engine drag, faded out by throttle."""
    ratio = params.total_ratio(gear)
    force = maps.drag_torque_curve(engine_speed) * ratio / params.r_wheel_rear
    theta0 = maps.zero_torque_throttle(engine_speed)
    if theta0 <= 0.0:
        fade = 1.0 if throttle <= 0.0 else 0.0
    else:
        fade = max(0.0, 1.0 - throttle / theta0)
    return max(force * fade, 0.0)


def brake_pressure_targets(F_x_target: float, drag_force: float,
                           params: VehicleParams) -> tuple[float, float]:
    """Per-axle brake pressures (front, rear) for a braking force demand."""
    if not F_x_target < 0.0:
        raise ValueError(f"brake pressure needs a braking demand, got F_x_target={F_x_target}")
    demand = -F_x_target
    f_brake = max(0.0, demand - max(drag_force, 0.0))
    front = min(params.brake_bias_front * demand, f_brake)
    rear = f_brake - front
    gain = params.brake_gain
    return front * params.r_wheel_front / gain, rear * params.r_wheel_rear / gain


def brake_force_from_pressures(p_front: float, p_rear: float, params: VehicleParams) -> float:
    """Inverse of :func:`brake_pressure_targets` without drag, N."""
    gain = params.brake_gain
    return gain * (p_front / params.r_wheel_front + p_rear / params.r_wheel_rear)


@dataclass(frozen=True)
class ForceOutput:
    throttle: float
    p_front: float
    p_rear: float
    mode: ForceMode
    drag_force: float
    hydraulic_front: float = 0.0
    hydraulic_rear: float = 0.0


def _select_mode(F: float, drag0: float, current: ForceMode, cfg: ForceCtrlConfig) -> ForceMode:
    hi = -drag0 + cfg.coast_band
    lo = -drag0 - cfg.coast_band
    h = cfg.mode_hysteresis
    # leaving the current zone needs an extra margin of h
    hi_edge = hi - h if current is ForceMode.DRIVE else hi + h
    lo_edge = lo + h if current is ForceMode.BRAKE else lo - h
    if F > hi_edge:
        return ForceMode.DRIVE
    if F < lo_edge:
        return ForceMode.BRAKE
    return ForceMode.COAST


def force_controller_step(F_x_target: float, vs: VehicleState, warmup_p: float, dt: float,
                          cfg: ForceCtrlConfig, params: VehicleParams,
                          maps: EngineCharacteristics, state: ForceCtrlState,
                          a_x_target: float = 0.0) -> ForceOutput:
    gear = vs.gear_engaged
    rpm = vs.engine_speed
    p_max = params.p_brake_max
    if gear < 1:
        state.mode = ForceMode.COAST
        state.trim.reset()
        state.last_trim = 0.0
        p = min(warmup_p, p_max)
        return ForceOutput(0.0, p, p, ForceMode.COAST, 0.0)

    drag0 = drag_brake_force(rpm, gear, 0.0, params, maps)
    mode = _select_mode(F_x_target, drag0, state.mode, cfg)
    if mode is not ForceMode.DRIVE and state.mode is ForceMode.DRIVE:
        state.trim.reset()
        state.last_trim = 0.0
    state.mode = mode

    if mode is ForceMode.DRIVE:
        torque = motor_torque_target(F_x_target, gear, params, rpm, maps, cfg)
        throttle = throttle_from_torque(torque, rpm, a_x_target, vs.a_x_meas, dt, cfg,
                                        maps, state)
        p = min(merge_warmup(0.0, warmup_p), p_max)
        return ForceOutput(throttle, p, p, mode, drag_brake_force(rpm, gear, throttle,
                                                                   params, maps))

    if mode is ForceMode.COAST:
        p = min(merge_warmup(0.0, warmup_p), p_max)
        return ForceOutput(0.0, p, p, mode, drag0)

    drag = drag_brake_force(rpm, gear, vs.throttle_meas, params, maps)
    hyd_f, hyd_r = brake_pressure_targets(F_x_target, drag, params)
    p_f = min(merge_warmup(hyd_f, warmup_p), p_max)
    p_r = min(merge_warmup(hyd_r, warmup_p), p_max)
    return ForceOutput(0.0, p_f, p_r, mode, drag, hyd_f, hyd_r)
