"""Acceleration target -> longitudinal force target (feedforward plus PID)."""

from __future__ import annotations

from dataclasses import dataclass, field

from .core_types import AccelCommand, VehicleParams, VehicleState
from .primitives import PidConfig, PidState, pid_step


def _default_pid() -> PidConfig:
    return PidConfig(kp=150.0, ki=600.0, kd=0.0, out_min=-2000.0, out_max=2000.0)


@dataclass(frozen=True)
class AccelCtrlConfig:
    pid: PidConfig = field(default_factory=_default_pid)
    v_roll_threshold: float = 0.5


def driving_resistances(v: float, params: VehicleParams,
                        v_roll_threshold: float = 0.0) -> tuple[float, float]:
    """Aerodynamic drag and rolling resistance magnitudes in N."""
    if v < 0:
        raise ValueError(f"velocity must be >= 0, got {v}")
    f_aero = 0.5 * params.rho_air * params.c_d_A * v * v
    f_roll = params.c_rr * params.m * params.g if v > v_roll_threshold else 0.0
    return f_aero, f_roll


def feedforward_force(a_x_target: float, v: float, params: VehicleParams,
                      v_roll_threshold: float = 0.0) -> float:
    f_aero, f_roll = driving_resistances(v, params, v_roll_threshold)
    return params.m_equivalent * a_x_target + f_aero + f_roll


@dataclass
class AccelCtrlState:
    pid: PidState = field(default_factory=PidState)
    last_feedforward: float = 0.0
    last_feedback: float = 0.0


def accel_controller_step(cmd: AccelCommand, vs: VehicleState, dt: float,
                          cfg: AccelCtrlConfig, params: VehicleParams,
                          state: AccelCtrlState) -> float:
    v = max(vs.v_est, 0.0)
    ff = feedforward_force(cmd.a_x_target, v, params, cfg.v_roll_threshold)
    fb = pid_step(state.pid, cfg.pid, cmd.a_x_target - vs.a_x_meas, dt)
    state.last_feedforward = ff
    state.last_feedback = fb
    return ff + fb
