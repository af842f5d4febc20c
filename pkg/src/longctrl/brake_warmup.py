"""Brake disc warmup: a small constant pressure applied during normal driving."""

from __future__ import annotations

from dataclasses import dataclass

from .core_types import ConfigError


@dataclass(frozen=True)
class WarmupConfig:
    p_warmup: float = 2.0e5
    ay_disable_threshold: float = 5.0
    max_laps: int = 2
    temp_target: float = 450.0
    ambient: float = 25.0

    def __post_init__(self):
        if self.p_warmup < 0:
            raise ConfigError("must be >= 0", "brake_warmup.p_warmup")
        if self.ay_disable_threshold < 0:
            raise ConfigError("must be >= 0", "brake_warmup.ay_disable_threshold")
        if self.max_laps < 0:
            raise ConfigError("must be >= 0", "brake_warmup.max_laps")
        if not self.temp_target > self.ambient:
            raise ConfigError("must exceed ambient", "brake_warmup.temp_target")


@dataclass
class WarmupState:
    # set once the discs are hot or the lap budget is spent
    latched_off: bool = False


def warmup_pressure(ay_target: float, disc_temp: float, lap_count: int,
                    cfg: WarmupConfig, state: WarmupState | None = None) -> float:
    """Warmup pressure for this tick.

    Temperature and lap count switch the warmup off for the rest of the
    session; lateral acceleration only suppresses it while it lasts.
    """
    if state is None:
        state = WarmupState()
    if disc_temp >= cfg.temp_target or lap_count >= cfg.max_laps:
        state.latched_off = True
    if state.latched_off or abs(ay_target) > cfg.ay_disable_threshold:
        return 0.0
    return cfg.p_warmup


def merge_warmup(p_target: float, p_warmup: float) -> float:
    if p_target < 0 or p_warmup < 0:
        raise ValueError("pressures must be >= 0")
    return max(p_target, p_warmup)
