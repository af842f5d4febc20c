"""Cascaded PI brake pressure controller with a Smith predictor.

Outer loop: pressure error -> pressure-rate setpoint. Inner loop: rate error
-> correction added on top of the target (unity feedforward). The feedback
pressure is the measurement shifted by the difference between the undelayed
and delayed outputs of an internal first-order-plus-deadtime model, so the
loops act on a delay-free estimate. Two PI gain sets are scheduled on the
magnitude of the target gradient.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

from .core_types import ConfigError
from .primitives import PidConfig, PidState, lowpass_step, pid_step


@dataclass(frozen=True)
class GainSet:
    outer: PidConfig
    inner: PidConfig


def _transient() -> GainSet:
    return GainSet(PidConfig(kp=40.0, ki=20.0), PidConfig(kp=0.02, ki=0.0))


def _steady() -> GainSet:
    return GainSet(PidConfig(kp=20.0, ki=20.0), PidConfig(kp=0.01, ki=0.0))


@dataclass(frozen=True)
class BpcConfig:
    plant_model_gain: float = 1.0
    plant_model_tau: float = 0.05
    plant_model_deadtime: float = 0.03
    gradient_threshold: float = 1.0e7
    gradient_hysteresis: float = 0.1
    transient: GainSet = field(default_factory=_transient)
    steady: GainSet = field(default_factory=_steady)
    p_min: float = 0.0
    p_max: float = 1.5e7
    tau_rate_filter: float = 0.005
    smith: bool = True

    def __post_init__(self):
        if self.plant_model_deadtime < 0:
            raise ConfigError("must be >= 0", "brake_pressure_controller.plant_model_deadtime")
        if self.plant_model_tau <= 0:
            raise ConfigError("must be > 0", "brake_pressure_controller.plant_model_tau")
        if not self.p_min <= self.p_max:
            raise ConfigError("p_min must be <= p_max", "brake_pressure_controller.p_min")
        if not 0 <= self.gradient_hysteresis < 1:
            raise ConfigError("must lie in [0, 1)",
                              "brake_pressure_controller.gradient_hysteresis")
        for name in ("transient", "steady"):
            gs = getattr(self, name)
            if gs.outer.kd or gs.inner.kd:
                raise ConfigError("PI loops take no derivative gain",
                                  f"brake_pressure_controller.{name}")


@dataclass
class BpcState:
    outer: PidState = field(default_factory=PidState)
    inner: PidState = field(default_factory=PidState)
    model_state: float = 0.0
    delay_buffer: deque = field(default_factory=deque)
    prev_target: float | None = None
    prev_feedback: float | None = None
    rate_filtered: float = 0.0
    transient: bool = False
    last_command: float = 0.0
    fault: bool = False

    def init_buffer(self, n: int, value: float = 0.0) -> None:
        self.delay_buffer = deque([value] * n, maxlen=n if n > 0 else None)


def delay_steps(deadtime: float, dt: float) -> int:
    return int(round(deadtime / dt))


def _rescale(state: PidState, old: PidConfig, new: PidConfig) -> None:
    # keeps ki * integrator continuous across a gain switch
    if new.ki != 0.0:
        state.integrator *= old.ki / new.ki


def bpc_step(p_target: float, p_meas: float, dt: float, cfg: BpcConfig,
             state: BpcState) -> float:
    """Brake pressure command for one tick.

    Non-finite inputs hold the previous command and set ``state.fault``.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if not (math.isfinite(p_target) and math.isfinite(p_meas)):
        state.fault = True
        return state.last_command
    state.fault = False

    n = delay_steps(cfg.plant_model_deadtime, dt)
    if len(state.delay_buffer) != n or (n > 0 and state.delay_buffer.maxlen != n):
        state.init_buffer(n, state.model_state)

    gradient = 0.0 if state.prev_target is None else abs(p_target - state.prev_target) / dt
    h = cfg.gradient_hysteresis
    transient = (gradient > cfg.gradient_threshold * (1 - h) if state.transient
                 else gradient > cfg.gradient_threshold * (1 + h))
    if transient != state.transient:
        old, new = (cfg.steady, cfg.transient) if transient else (cfg.transient, cfg.steady)
        _rescale(state.outer, old.outer, new.outer)
        _rescale(state.inner, old.inner, new.inner)
        state.transient = transient
    gains = cfg.transient if transient else cfg.steady

    if cfg.smith:
        undelayed = state.model_state
        delayed = state.delay_buffer[0] if n > 0 else undelayed
        feedback = p_meas + undelayed - delayed
    else:
        feedback = p_meas
    raw_rate = 0.0 if state.prev_feedback is None else (feedback - state.prev_feedback) / dt
    rate = lowpass_step(state.rate_filtered, raw_rate, cfg.tau_rate_filter, dt)
    state.rate_filtered = rate

    saved = state.outer.integrator, state.inner.integrator
    error = p_target - feedback
    rate_sp = pid_step(state.outer, gains.outer, error, dt)
    delta = pid_step(state.inner, gains.inner, rate_sp - rate, dt)
    raw = p_target + delta
    command = min(max(raw, cfg.p_min), cfg.p_max)
    if (raw > cfg.p_max and delta > 0) or (raw < cfg.p_min and delta < 0):
        state.outer.integrator, state.inner.integrator = saved

    if n > 0:
        state.delay_buffer.append(state.model_state)
    state.model_state += dt / cfg.plant_model_tau * (cfg.plant_model_gain * command
                                                     - state.model_state)
    state.prev_target = p_target
    state.prev_feedback = feedback
    state.last_command = command
    return command
