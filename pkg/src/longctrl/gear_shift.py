"""Predictive gear shift controller.

Downshifts are pulled forward when the planned trajectory says the lower gear
will be needed inside a corner, where shifting is cut because of lateral
acceleration. The velocity dependent lateral-acceleration limit is a plain
``v -> a_y,max`` table; vertical acceleration is not modelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core_types import (ConfigError, InvalidGearError, Trajectory, VehicleParams,
                         VehicleState, engine_speed_from_velocity)
from .primitives import Table1D


def _default_ay_limit() -> Table1D:
    return Table1D((0.0, 20.0, 40.0, 80.0), (6.0, 8.0, 12.0, 18.0), "gear_shift.ay_limit")


@dataclass(frozen=True)
class GearShiftConfig:
    t_lookahead: float = 0.3
    ay_limit_table: Table1D = field(default_factory=_default_ay_limit)
    downshift_rpm: float = 5000.0
    upshift_rpm: float = 8800.0
    overrev_block_rpm: float = 9500.0
    horizon_length: float = 3.0
    min_shift_interval: float = 0.4
    predictive: bool = True

    def __post_init__(self):
        if self.t_lookahead < 0:
            raise ConfigError("must be >= 0", "gear_shift.t_lookahead")
        if self.horizon_length <= 0:
            raise ConfigError("must be > 0", "gear_shift.horizon_length")
        if self.min_shift_interval < 0:
            raise ConfigError("must be >= 0", "gear_shift.min_shift_interval")
        if not self.downshift_rpm < self.upshift_rpm <= self.overrev_block_rpm:
            raise ConfigError("need downshift_rpm < upshift_rpm <= overrev_block_rpm",
                              "gear_shift.upshift_rpm")

    def ay_limit(self, v: float) -> float:
        return self.ay_limit_table(v)


@dataclass
class GearShiftState:
    current_request: int
    last_shift_time: float = -math.inf


def predict_engine_speed(traj: Trajectory, gear: int,
                         params: VehicleParams) -> list[tuple[float, float]]:
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    params.ratio(gear)
    return [(p.t_offset, engine_speed_from_velocity(p.v_target, gear, params)) for p in traj]


def find_downshift_time(rpm_series, downshift_rpm: float) -> float | None:
    """First time offset whose predicted rpm falls below ``downshift_rpm``."""
    for t_offset, rpm in rpm_series:
        if rpm < downshift_rpm:
            return t_offset
    return None


def _lower_gear_ok(v: float, gear: int, cfg: GearShiftConfig, params: VehicleParams) -> bool:
    if gear <= 1:
        return False
    return engine_speed_from_velocity(max(v, 0.0), gear - 1, params) <= cfg.overrev_block_rpm


def early_downshift_due(traj: Trajectory, gear: int, v: float, cfg: GearShiftConfig,
                        params: VehicleParams) -> bool:
    """Whether the preview demands a downshift now, before the corner forbids it.

    The window between ``t_lookahead`` and the time the lower gear is required
    must be non-empty and every preview point in it must exceed the lateral
    limit.
    """
    if len(traj) == 0 or not _lower_gear_ok(v, gear, cfg, params):
        return False
    horizon = [p for p in traj if p.t_offset <= cfg.horizon_length]
    if not horizon:
        return False
    series = predict_engine_speed(Trajectory(tuple(horizon)), gear, params)
    t_shift = find_downshift_time(series, cfg.downshift_rpm)
    if t_shift is None or t_shift < cfg.t_lookahead:
        return False
    window = [p for p in horizon if cfg.t_lookahead <= p.t_offset <= t_shift]
    return bool(window) and all(abs(p.a_y_planned) > cfg.ay_limit(p.v_target) for p in window)


def decide_gear(state: GearShiftState, vs: VehicleState, traj: Trajectory | None,
                cfg: GearShiftConfig, params: VehicleParams) -> int:
    """Return the gear request for this tick and update ``state``.

    Conventional mode (``cfg.predictive`` false) shifts purely on engine speed
    and ignores lateral acceleration.
    """
    gear = state.current_request
    if not 1 <= gear <= params.n_gears:
        raise InvalidGearError(f"gear request {gear} not in 1..{params.n_gears}")
    if vs.t - state.last_shift_time < cfg.min_shift_interval:
        return gear

    v = max(vs.v_est, 0.0)
    if cfg.predictive and abs(vs.a_y_meas) > cfg.ay_limit(v):
        return gear

    new_gear = gear
    if vs.engine_speed > cfg.upshift_rpm and gear < params.n_gears:
        new_gear = gear + 1
    elif vs.engine_speed < cfg.downshift_rpm and _lower_gear_ok(v, gear, cfg, params):
        new_gear = gear - 1
    elif cfg.predictive and traj is not None and early_downshift_due(traj, gear, v, cfg, params):
        new_gear = gear - 1

    if new_gear != gear:
        state.current_request = new_gear
        state.last_shift_time = vs.t
    return new_gear
