"""PID with anti-windup, first-order low-pass and clamped lookup tables."""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence

from .core_types import ConfigError


class ControlFault(ArithmeticError):
    """A controller received a non-finite input; its state was left untouched."""


@dataclass(frozen=True)
class PidConfig:
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    out_min: float = -math.inf
    out_max: float = math.inf
    tau_derivative_filter: float = 0.0
    # "conditional" freezes the integrator; "back_calculation" bleeds it
    anti_windup: str = "conditional"
    k_back_calculation: float = 1.0

    def __post_init__(self):
        if not self.out_min <= self.out_max:
            raise ConfigError(f"out_min {self.out_min} > out_max {self.out_max}", "pid.out_min")
        if self.tau_derivative_filter < 0:
            raise ConfigError("must be >= 0", "pid.tau_derivative_filter")
        if self.anti_windup not in ("conditional", "back_calculation"):
            raise ConfigError(f"unknown scheme {self.anti_windup!r}", "pid.anti_windup")


@dataclass
class PidState:
    integrator: float = 0.0
    prev_error: float | None = None
    prev_derivative: float = 0.0

    def reset(self) -> None:
        self.integrator = 0.0
        self.prev_error = None
        self.prev_derivative = 0.0


def _clip(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def pid_step(state: PidState, cfg: PidConfig, error: float, dt: float,
             integrate: bool = True) -> float:
    """Advance the PID by one sample and return the limited output.

    ``integrate=False`` holds the integrator, which lets an outer loop freeze
    this one when a downstream actuator saturates.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if not math.isfinite(error):
        raise ControlFault(f"non-finite PID error {error!r}")

    if state.prev_error is None:
        raw_derivative = 0.0
    else:
        raw_derivative = (error - state.prev_error) / dt
    alpha = dt / (cfg.tau_derivative_filter + dt)
    derivative = state.prev_derivative + alpha * (raw_derivative - state.prev_derivative)

    integrator = state.integrator
    base = cfg.kp * error + cfg.kd * derivative
    if integrate and cfg.ki != 0.0:
        candidate = integrator + error * dt
        unclamped = base + cfg.ki * candidate
        if cfg.anti_windup == "conditional":
            pushing_high = unclamped > cfg.out_max and error * cfg.ki > 0
            pushing_low = unclamped < cfg.out_min and error * cfg.ki < 0
            if not (pushing_high or pushing_low):
                integrator = candidate
        else:
            saturated = _clip(unclamped, cfg.out_min, cfg.out_max)
            integrator = candidate + cfg.k_back_calculation * (saturated - unclamped) / cfg.ki * dt
        # keep ki * integrator inside the output range
        lo, hi = sorted((cfg.out_min / cfg.ki, cfg.out_max / cfg.ki))
        integrator = _clip(integrator, lo, hi)

    state.integrator = integrator
    state.prev_error = error
    state.prev_derivative = derivative
    return _clip(base + cfg.ki * integrator, cfg.out_min, cfg.out_max)


def lowpass_step(y_prev: float, u: float, tau: float, dt: float) -> float:
    """First-order exponential smoothing; ``tau == 0`` passes ``u`` through."""
    if tau < 0 or not dt > 0:
        raise ValueError("need tau >= 0 and dt > 0")
    if not math.isfinite(u):
        raise ControlFault(f"non-finite filter input {u!r}")
    return y_prev + dt / (tau + dt) * (u - y_prev)


def _check_axis(axis: Sequence[float], name: str) -> tuple[float, ...]:
    axis = tuple(float(a) for a in axis)
    if not axis:
        raise ConfigError("empty table axis", name)
    if any(not math.isfinite(a) for a in axis):
        raise ConfigError("non-finite breakpoint", name)
    if any(b <= a for a, b in zip(axis, axis[1:])):
        raise ConfigError("breakpoints must be strictly increasing", name)
    return axis


def _bracket(axis: tuple[float, ...], x: float) -> tuple[int, float]:
    """Index of the left breakpoint and the interpolation weight (clamped)."""
    n = len(axis)
    if n == 1 or x <= axis[0]:
        return 0, 0.0
    if x >= axis[-1]:
        return n - 2, 1.0
    i = bisect_right(axis, x) - 1
    return i, (x - axis[i]) / (axis[i + 1] - axis[i])


@dataclass(frozen=True)
class Table1D:
    x: tuple[float, ...]
    y: tuple[float, ...]
    name: str = field(default="table1d", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "x", _check_axis(self.x, f"{self.name}.x"))
        y = tuple(float(v) for v in self.y)
        if len(y) != len(self.x):
            raise ConfigError(f"{len(y)} values for {len(self.x)} breakpoints", f"{self.name}.y")
        object.__setattr__(self, "y", y)

    def __call__(self, x: float) -> float:
        if len(self.x) == 1:
            return self.y[0]
        i, w = _bracket(self.x, x)
        return self.y[i] + w * (self.y[i + 1] - self.y[i])

    @classmethod
    def constant(cls, value: float, name: str = "table1d") -> "Table1D":
        return cls((0.0,), (value,), name)

    @classmethod
    def from_dict(cls, data: dict, name: str = "table1d") -> "Table1D":
        try:
            return cls(data["x"], data["y"], name)
        except KeyError as exc:
            raise ConfigError(f"missing key {exc.args[0]!r}", name) from None


@dataclass(frozen=True)
class Table2D:
    """Bilinear table ``z[i][j]`` over breakpoints ``x[i]`` and ``y[j]``."""

    x: tuple[float, ...]
    y: tuple[float, ...]
    z: tuple[tuple[float, ...], ...]
    name: str = field(default="table2d", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "x", _check_axis(self.x, f"{self.name}.x"))
        object.__setattr__(self, "y", _check_axis(self.y, f"{self.name}.y"))
        z = tuple(tuple(float(v) for v in row) for row in self.z)
        if len(z) != len(self.x) or any(len(row) != len(self.y) for row in z):
            raise ConfigError(
                f"grid must be {len(self.x)}x{len(self.y)} to match the axes", f"{self.name}.z")
        object.__setattr__(self, "z", z)

    def __call__(self, x: float, y: float) -> float:
        z = self.z
        if len(self.x) == 1:
            i, wx, i1 = 0, 0.0, 0
        else:
            i, wx = _bracket(self.x, x)
            i1 = i + 1
        if len(self.y) == 1:
            j, wy, j1 = 0, 0.0, 0
        else:
            j, wy = _bracket(self.y, y)
            j1 = j + 1
        lo = z[i][j] + wy * (z[i][j1] - z[i][j])
        hi = z[i1][j] + wy * (z[i1][j1] - z[i1][j])
        return lo + wx * (hi - lo)

    @classmethod
    def from_dict(cls, data: dict, name: str = "table2d") -> "Table2D":
        try:
            return cls(data["x"], data["y"], data["z"], name)
        except KeyError as exc:
            raise ConfigError(f"missing key {exc.args[0]!r}", name) from None


def table1d_eval(table: Table1D, x: float) -> float:
    return table(x)


def table2d_eval(table: Table2D, x: float, y: float) -> float:
    return table(x, y)
