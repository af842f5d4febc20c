"""Heuristic ABS and traction control acting on per-axle brake pressure targets.

Both work on an intervention ratio ``rho`` applied to a reference pressure.
ABS latches the incoming target at activation as the maximum permissible
pressure, lets it decay during the stop and outputs ``rho * p_max`` no matter
what the upstream target does. TC adds ``(1 - rho) * p_tc_scale`` of rear
brake pressure on top of the target and cuts the throttle above an upper slip
threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .core_types import ConfigError


class Mode(str, Enum):
    INACTIVE = "inactive"
    ACTIVE = "active"
    PAUSED = "paused"


@dataclass(frozen=True)
class AbsConfig:
    kappa_threshold: float = 0.10
    rho_initial: float = 0.7
    rho_min: float = 0.02
    k_decrease: float = 50.0
    k_increase: float = 50.0
    max_decay_rate: float = 0.05
    decay_mode: str = "time"
    pause_force_threshold: float = 2000.0
    pause_time: float = 0.5
    t_predict: float = 0.1
    enabled: bool = True

    def __post_init__(self):
        if not 0.0 < self.rho_initial < 1.0:
            raise ConfigError("must lie in (0, 1)", "abs.rho_initial")
        if self.t_predict < 0:
            raise ConfigError("must be >= 0", "abs.t_predict")
        if self.k_decrease <= 0 or self.k_increase <= 0:
            raise ConfigError("gains must be > 0", "abs.k_decrease")
        if self.max_decay_rate < 0:
            raise ConfigError("must be >= 0", "abs.max_decay_rate")
        if self.decay_mode not in ("time", "speed"):
            raise ConfigError(f"unknown decay mode {self.decay_mode!r}", "abs.decay_mode")
        if not 0.0 <= self.rho_min < self.rho_initial:
            raise ConfigError("must lie in [0, rho_initial)", "abs.rho_min")


@dataclass(frozen=True)
class TcConfig:
    kappa_threshold: float = 0.10
    kappa_cut_upper: float = 0.25
    rho_initial: float = 0.7
    rho_min: float = 0.01
    k_decrease: float = 60.0
    k_increase: float = 30.0
    p_tc_scale: float = 4.0e6
    t_predict: float = 0.0
    enabled: bool = True

    def __post_init__(self):
        if not self.kappa_threshold < self.kappa_cut_upper:
            raise ConfigError("kappa_threshold must be < kappa_cut_upper", "tc.kappa_threshold")
        if not 0.0 < self.rho_initial < 1.0:
            raise ConfigError("must lie in (0, 1)", "tc.rho_initial")
        if self.k_decrease <= 0 or self.k_increase <= 0:
            raise ConfigError("gains must be > 0", "tc.k_decrease")
        if self.p_tc_scale < 0:
            raise ConfigError("must be >= 0", "tc.p_tc_scale")
        if self.t_predict < 0:
            raise ConfigError("must be >= 0", "tc.t_predict")


@dataclass
class StabilityState:
    mode: Mode = Mode.INACTIVE
    p_max_latched: float = 0.0
    p_latch_initial: float = 0.0
    rho: float = 1.0
    pause_timer: float = 0.0
    v_prev: float = 0.0
    slip_prev: float | None = None


def _update_rho(rho: float, slip: float, threshold: float, k_dec: float, k_inc: float,
                dt: float, rho_min: float) -> float:
    if slip > threshold:
        rho *= 1.0 - min(k_dec * (slip - threshold) * dt, 1.0)
    else:
        rho *= 1.0 + k_inc * (threshold - slip) * dt
    return min(max(rho, rho_min), 1.0)


def _activate_abs(state: StabilityState, p_in: float, v: float, cfg: AbsConfig) -> float:
    state.mode = Mode.ACTIVE
    state.p_max_latched = p_in
    state.p_latch_initial = p_in
    state.rho = cfg.rho_initial
    state.pause_timer = 0.0
    state.v_prev = v
    return state.rho * state.p_max_latched


def abs_step(p_in: float, kappa: float, F_x_est: float, v: float, dt: float,
             cfg: AbsConfig, state: StabilityState) -> float:
    """One ABS tick for one axle.

    ``kappa`` is the worst (most negative) slip of the axle; only braking slip
    counts. ``F_x_est`` is the braking force currently produced, used for the
    pause rule.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    slip = max(-kappa, 0.0)
    if not cfg.enabled:
        return p_in
    # slip extrapolated over the actuation delay; equals slip when t_predict is 0
    slip_rate = 0.0 if state.slip_prev is None else (slip - state.slip_prev) / dt
    state.slip_prev = slip
    slip_pred = max(slip + cfg.t_predict * slip_rate, 0.0)

    if state.mode is Mode.INACTIVE:
        if slip > cfg.kappa_threshold and p_in > 0.0:
            return _activate_abs(state, p_in, v, cfg)
        return p_in

    if state.mode is Mode.PAUSED:
        if slip > cfg.kappa_threshold and p_in > 0.0:
            return _activate_abs(state, p_in, v, cfg)
        if p_in <= 0.0:
            state.mode = Mode.INACTIVE
        return p_in

    if cfg.decay_mode == "time":
        state.p_max_latched -= cfg.max_decay_rate * state.p_latch_initial * dt
    else:
        state.p_max_latched -= (cfg.max_decay_rate * state.p_latch_initial
                                * max(state.v_prev - v, 0.0))
    state.p_max_latched = max(state.p_max_latched, 0.0)
    state.v_prev = v

    if p_in < state.p_max_latched:
        state.mode = Mode.INACTIVE
        state.rho = 1.0
        return p_in

    state.rho = _update_rho(state.rho, slip_pred, cfg.kappa_threshold, cfg.k_decrease,
                            cfg.k_increase, dt, cfg.rho_min)
    if abs(F_x_est) < cfg.pause_force_threshold:
        state.pause_timer += dt
        if state.pause_timer >= cfg.pause_time:
            state.mode = Mode.PAUSED
            state.pause_timer = 0.0
            return p_in
    else:
        state.pause_timer = 0.0
    return state.rho * state.p_max_latched


def tc_step(throttle_in: float, p_in_rear: float, kappa_rear: float, dt: float,
            cfg: TcConfig, state: StabilityState) -> tuple[float, float]:
    """One TC tick; ``kappa_rear`` is the largest rear driving slip."""
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if not cfg.enabled:
        return throttle_in, p_in_rear
    kappa_rate = 0.0 if state.slip_prev is None else (kappa_rear - state.slip_prev) / dt
    state.slip_prev = kappa_rear
    kappa_pred = kappa_rear + cfg.t_predict * kappa_rate

    if state.mode is Mode.INACTIVE:
        if kappa_rear > cfg.kappa_threshold:
            state.mode = Mode.ACTIVE
            state.rho = cfg.rho_initial
            state.p_max_latched = cfg.p_tc_scale
    else:
        state.rho = _update_rho(state.rho, kappa_pred, cfg.kappa_threshold, cfg.k_decrease,
                                cfg.k_increase, dt, cfg.rho_min)
        if kappa_rear < cfg.kappa_threshold and state.rho >= 1.0:
            state.mode = Mode.INACTIVE

    added = (1.0 - state.rho) * state.p_max_latched if state.mode is Mode.ACTIVE else 0.0
    throttle_out = 0.0 if kappa_rear > cfg.kappa_cut_upper else throttle_in
    return throttle_out, p_in_rear + added


@dataclass
class StabilityEvent:
    t: float
    channel: str
    mode: str


@dataclass
class StabilityController:
    abs_cfg: AbsConfig = field(default_factory=AbsConfig)
    tc_cfg: TcConfig = field(default_factory=TcConfig)
    abs_front: StabilityState = field(default_factory=StabilityState)
    abs_rear: StabilityState = field(default_factory=StabilityState)
    tc: StabilityState = field(default_factory=StabilityState)
    events: list[StabilityEvent] = field(default_factory=list)
    # ABS outputs of the last step, before TC adds rear pressure
    last_abs: tuple[float, float] = (0.0, 0.0)

    def step(self, t: float, throttle: float, p_front: float, p_rear: float,
             slips, F_x_est: float, v: float, dt: float) -> tuple[float, float, float]:
        """Apply ABS per axle then TC on the rear; returns (throttle, p_front, p_rear)."""
        before = (self.abs_front.mode, self.abs_rear.mode, self.tc.mode)
        p_f = abs_step(p_front, min(slips[0], slips[1]), F_x_est, v, dt, self.abs_cfg,
                       self.abs_front)
        p_r = abs_step(p_rear, min(slips[2], slips[3]), F_x_est, v, dt, self.abs_cfg,
                       self.abs_rear)
        self.last_abs = (p_f, p_r)
        throttle, p_r = tc_step(throttle, p_r, max(slips[2], slips[3]), dt, self.tc_cfg,
                                self.tc)
        after = (self.abs_front.mode, self.abs_rear.mode, self.tc.mode)
        for name, old, new in zip(("abs_front", "abs_rear", "tc"), before, after):
            if old is not new:
                self.events.append(StabilityEvent(t, name, new.value))
        return throttle, p_f, p_r
