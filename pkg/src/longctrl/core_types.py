"""Domain types shared by the controllers and the plant.

All quantities are SI. Engine speed is the only exception and is carried in
rpm, converted at :func:`engine_speed_from_velocity`.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

RAD_S_TO_RPM = 60.0 / (2.0 * math.pi)

WHEELS = ("FL", "FR", "RL", "RR")


class InvalidGearError(ValueError):
    """Raised when a gear index is neutral or outside the gearbox."""


class ConfigError(ValueError):
    """Raised for invalid configuration values.

    ``path`` names the offending key (``section.key``) when known.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def _require(cond: bool, what: str, path: str | None = None) -> None:
    if not cond:
        raise ConfigError(what, path)


def _finite(*values: float) -> bool:
    return all(math.isfinite(v) for v in values)


@dataclass(frozen=True)
class VehicleState:
    """Measured snapshot handed to every controller on its tick."""

    t: float
    v_est: float
    a_x_meas: float
    a_y_meas: float
    yaw_rate: float
    wheel_speed: tuple[float, float, float, float]
    engine_speed: float
    gear_engaged: int
    p_brake_meas_front: float
    p_brake_meas_rear: float
    throttle_meas: float
    disc_temp_front: float
    disc_temp_rear: float
    lap_count: int = 0

    def __post_init__(self):
        if len(self.wheel_speed) != 4:
            raise ValueError("wheel_speed needs four entries (FL, FR, RL, RR)")
        if min(self.wheel_speed) < 0.0:
            raise ValueError(f"negative wheel speed: {self.wheel_speed}")
        if self.p_brake_meas_front < 0.0 or self.p_brake_meas_rear < 0.0:
            raise ValueError("brake pressures must be >= 0")
        if not 0.0 <= self.throttle_meas <= 1.0:
            raise ValueError(f"throttle_meas {self.throttle_meas} outside [0, 1]")
        if self.gear_engaged < 0:
            raise ValueError("gear_engaged must be >= 0")
        if self.lap_count < 0:
            raise ValueError("lap_count must be >= 0")


@dataclass(frozen=True)
class TrajectoryPoint:
    t_offset: float
    v_target: float
    a_y_planned: float = 0.0
    a_x_planned: float = 0.0

    def __post_init__(self):
        if self.v_target < 0.0:
            raise ValueError(f"v_target must be >= 0, got {self.v_target}")


@dataclass(frozen=True)
class Trajectory:
    """Preview of the planned motion, ordered by ``t_offset``."""

    points: tuple[TrajectoryPoint, ...]

    def __post_init__(self):
        pts = tuple(self.points)
        object.__setattr__(self, "points", pts)
        for a, b in zip(pts, pts[1:]):
            if not b.t_offset > a.t_offset:
                raise ValueError("trajectory t_offset must be strictly increasing")

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass(frozen=True)
class AccelCommand:
    a_x_target: float

    def __post_init__(self):
        if not math.isfinite(self.a_x_target):
            raise ValueError("a_x_target must be finite")


@dataclass(frozen=True)
class ActuationCommand:
    throttle: float
    p_brake_target_front: float
    p_brake_target_rear: float
    gear_request: int

    def __post_init__(self):
        if not 0.0 <= self.throttle <= 1.0:
            raise ValueError(f"throttle {self.throttle} outside [0, 1]")
        if self.p_brake_target_front < 0.0 or self.p_brake_target_rear < 0.0:
            raise ValueError("brake pressure targets must be >= 0")

    def check_limits(self, params: "VehicleParams") -> None:
        p_max = params.p_brake_max
        if self.p_brake_target_front > p_max or self.p_brake_target_rear > p_max:
            raise ValueError(f"brake pressure target exceeds hydraulic maximum {p_max} Pa")
        params.ratio(self.gear_request)


@dataclass(frozen=True)
class VehicleParams:
    """Static physical description shared by the controllers and the plant.

    ``brake_bias_front`` is the front share of the total braking force.
    """

    m: float = 800.0
    J_drivetrain: float = 6.0
    r_wheel_front: float = 0.29
    r_wheel_rear: float = 0.31
    gear_ratios: tuple[float, ...] = (2.8, 2.1, 1.7, 1.42, 1.24, 1.1)
    tau_final_drive: float = 3.0
    eta_drivetrain: float = 0.92
    d_bore: float = 0.06
    mu_brake: float = 0.45
    r_lever: float = 0.13
    brake_bias_front: float = 0.6
    c_d_A: float = 1.0
    rho_air: float = 1.2
    c_rr: float = 0.015
    c_l_A: float = 3.0
    g: float = 9.81
    wheelbase: float = 3.0
    track_front: float = 1.6
    track_rear: float = 1.55
    cog_to_front: float = 1.65
    rev_limit: float = 9800.0
    idle_speed: float = 1000.0
    downshift_rpm: float = 5000.0
    upshift_rpm: float = 8800.0
    overrev_block_rpm: float = 9500.0
    p_brake_max: float = 1.5e7

    def __post_init__(self):
        object.__setattr__(self, "gear_ratios", tuple(float(r) for r in self.gear_ratios))
        positive = (
            "m", "J_drivetrain", "r_wheel_front", "r_wheel_rear", "tau_final_drive",
            "eta_drivetrain", "d_bore", "mu_brake", "r_lever", "c_d_A", "rho_air",
            "c_rr", "c_l_A", "g", "wheelbase", "track_front", "track_rear",
            "cog_to_front", "rev_limit", "idle_speed", "downshift_rpm",
            "upshift_rpm", "overrev_block_rpm", "p_brake_max",
        )
        for name in positive:
            value = getattr(self, name)
            _require(_finite(value) and value > 0.0, f"must be finite and > 0, got {value}",
                     f"vehicle.{name}")
        _require(self.eta_drivetrain <= 1.0, "must be <= 1", "vehicle.eta_drivetrain")
        _require(0.0 < self.brake_bias_front < 1.0, "must lie in (0, 1)",
                 "vehicle.brake_bias_front")
        _require(self.cog_to_front < self.wheelbase, "must be < wheelbase",
                 "vehicle.cog_to_front")
        _require(len(self.gear_ratios) >= 1, "need at least one gear", "vehicle.gear_ratios")
        _require(all(r > 0 for r in self.gear_ratios), "ratios must be > 0",
                 "vehicle.gear_ratios")
        _require(all(a > b for a, b in zip(self.gear_ratios, self.gear_ratios[1:])),
                 "ratios must strictly decrease with gear number", "vehicle.gear_ratios")
        _require(self.downshift_rpm < self.upshift_rpm <= self.overrev_block_rpm,
                 "need downshift_rpm < upshift_rpm <= overrev_block_rpm",
                 "vehicle.upshift_rpm")

    @property
    def n_gears(self) -> int:
        return len(self.gear_ratios)

    def ratio(self, gear: int) -> float:
        """Gearbox ratio of ``gear`` (1-based)."""
        if (not isinstance(gear, numbers.Integral) or isinstance(gear, bool)
                or not 1 <= gear <= self.n_gears):
            raise InvalidGearError(f"gear {gear!r} not in 1..{self.n_gears}")
        return self.gear_ratios[int(gear) - 1]

    def total_ratio(self, gear: int) -> float:
        return self.ratio(gear) * self.tau_final_drive

    @property
    def brake_gain(self) -> float:
        """Brake torque per unit pressure of one axle, N*m/Pa."""
        return 2.0 * math.pi * (self.d_bore / 2.0) ** 2 * self.mu_brake * self.r_lever

    @property
    def m_equivalent(self) -> float:
        return self.m + self.J_drivetrain / self.r_wheel_rear ** 2

    def static_axle_loads(self) -> tuple[float, float]:
        w = self.m * self.g
        front = w * (self.wheelbase - self.cog_to_front) / self.wheelbase
        return front, w - front


def engine_speed_from_velocity(v: float, gear: int, params: VehicleParams) -> float:
    """Engine speed in rpm for a rigidly engaged ``gear`` at vehicle speed ``v``."""
    if v < 0.0:
        raise ValueError(f"velocity must be >= 0, got {v}")
    ratio = params.total_ratio(gear)
    return v / params.r_wheel_rear * ratio * RAD_S_TO_RPM


def vehicle_params_from_dict(data: dict, path: str = "vehicle") -> VehicleParams:
    known = set(VehicleParams.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", path)
    kwargs = dict(data)
    if "gear_ratios" in kwargs:
        kwargs["gear_ratios"] = tuple(kwargs["gear_ratios"])
    return VehicleParams(**kwargs)

