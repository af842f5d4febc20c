"""Wheel slip and vehicle speed from wheel speeds.

Under acceleration the undriven front wheels give the vehicle speed; under
braking the estimate blends over to the state-estimation velocity. The blend
factor is driven by front brake pressure and filtered deceleration:

    k = clip(max(p_front / 5e5 Pa, -(a_x_filtered + 5)), 0, 1)

with ``a_x_filtered`` taken as its numeric value in m/s^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core_types import ConfigError, VehicleParams, VehicleState
from .primitives import Table1D, lowpass_step

FRONT, REAR = (0, 1), (2, 3)
_IS_LEFT = (True, False, True, False)


def _rolling_radius(r: float) -> Table1D:
    return Table1D((0.0, 30.0, 60.0, 90.0), (r, r + 0.002, r + 0.005, r + 0.008))


@dataclass(frozen=True)
class SlipConfig:
    r_e_curve_front: Table1D = field(default_factory=lambda: _rolling_radius(0.29))
    r_e_curve_rear: Table1D = field(default_factory=lambda: _rolling_radius(0.31))
    p_norm: float = 5.0e5
    a_offset: float = 5.0
    k_lowpass_tau: float = 0.05
    a_lowpass_tau: float = 0.02
    v_min_denominator: float = 1.0

    def __post_init__(self):
        for name in ("r_e_curve_front", "r_e_curve_rear"):
            if min(getattr(self, name).y) <= 0:
                raise ConfigError("radii must be > 0", f"slip.{name}")
        if self.v_min_denominator <= 0:
            raise ConfigError("must be > 0", "slip.v_min_denominator")
        if self.p_norm <= 0:
            raise ConfigError("must be > 0", "slip.p_norm")

    def radius(self, wheel: int, v: float) -> float:
        curve = self.r_e_curve_front if wheel in FRONT else self.r_e_curve_rear
        return curve(v)


@dataclass
class SlipState:
    k_filtered: float = 0.0
    a_x_filtered: float = 0.0
    k_raw: float = 0.0
    v_front_wheels: float = 0.0
    v_blend: float = 0.0


def contact_velocity(yaw_rate: float, wheel: int, v_cog: float,
                     params: VehicleParams) -> float:
    """Longitudinal speed at the wheel centre of a two-track model."""
    track = params.track_front if wheel in FRONT else params.track_rear
    offset = yaw_rate * track / 2.0
    return v_cog - offset if _IS_LEFT[wheel] else v_cog + offset


def wheel_slip(omega: float, v_contact: float, r_e: float, cfg: SlipConfig) -> float:
    """Longitudinal slip, positive when driving and -1 for a locked wheel.

    Reported as 0 below ``v_min_denominator``.
    """
    if omega < 0:
        raise ValueError("wheel speed must be >= 0")
    if v_contact < cfg.v_min_denominator:
        return 0.0
    return (omega * r_e - v_contact) / v_contact


def velocity_from_front_wheels(vs: VehicleState, params: VehicleParams, cfg: SlipConfig,
                               iterations: int = 2) -> float:
    """Vehicle speed assuming zero slip on both front wheels."""
    omegas = vs.wheel_speed[0], vs.wheel_speed[1]
    offsets = [contact_velocity(vs.yaw_rate, w, 0.0, params) for w in FRONT]
    r = params.r_wheel_front
    v = sum(om * r - off for om, off in zip(omegas, offsets)) / 2.0
    for _ in range(iterations):
        r = cfg.r_e_curve_front(max(v, 0.0))
        v = sum(om * r - off for om, off in zip(omegas, offsets)) / 2.0
    return v


def blend_factor(p_b_front: float, a_x_filtered: float, cfg: SlipConfig) -> float:
    k = max(p_b_front / cfg.p_norm, -(a_x_filtered + cfg.a_offset))
    return min(max(k, 0.0), 1.0)


def estimate(vs: VehicleState, dt: float, cfg: SlipConfig, params: VehicleParams,
             state: SlipState) -> tuple[tuple[float, float, float, float], float]:
    """Update the filters and return per-wheel slips and the blended speed."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    state.a_x_filtered = lowpass_step(state.a_x_filtered, vs.a_x_meas, cfg.a_lowpass_tau, dt)
    state.k_raw = blend_factor(vs.p_brake_meas_front, state.a_x_filtered, cfg)
    k = lowpass_step(state.k_filtered, state.k_raw, cfg.k_lowpass_tau, dt)
    state.k_filtered = min(max(k, 0.0), 1.0)

    v_fw = velocity_from_front_wheels(vs, params, cfg)
    k = state.k_filtered
    v_blend = max((1.0 - k) * v_fw + k * vs.v_est, 0.0)
    state.v_front_wheels = v_fw
    state.v_blend = v_blend

    slips = tuple(
        wheel_slip(vs.wheel_speed[w], contact_velocity(vs.yaw_rate, w, v_blend, params),
                   cfg.radius(w, v_blend), cfg)
        for w in range(4)
    )
    return slips, v_blend
