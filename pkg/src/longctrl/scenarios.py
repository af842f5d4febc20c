"""Scenario definitions and the timed plan they drive.

A plan is the time series the upstream planner would publish: target velocity,
planned longitudinal and lateral acceleration and a phase label, sampled on a
fixed grid. The runner cuts a preview :class:`Trajectory` out of it every
gear-controller tick.

Plans come either from a CSV file (columns ``t, v_target, a_y_planned,
a_x_planned`` and optionally ``phase``) or from the ``segments`` generator:
a list of pieces, each holding a planned ``a_x`` and ``a_y`` that are ramped
linearly from the previous piece's values over ``ramp_x`` / ``ramp_y``
seconds. A piece lasts ``duration`` seconds or, with ``v_end``, until the
integrated target speed reaches ``v_end``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .config import build, load_toml, loads_toml
from .core_types import ConfigError, Trajectory, TrajectoryPoint

PLAN_DT = 0.01


@dataclass(frozen=True)
class Segment:
    phase: str = "cruise"
    duration: float | None = None
    v_end: float | None = None
    a_x: float = 0.0
    a_y: float = 0.0
    ramp_x: float = 0.0
    ramp_y: float = 0.0

    def __post_init__(self):
        if (self.duration is None) == (self.v_end is None):
            raise ConfigError("give exactly one of duration and v_end", "trajectory.segments")
        if self.duration is not None and self.duration <= 0:
            raise ConfigError("duration must be > 0", "trajectory.segments")
        if self.v_end is not None and self.v_end < 0:
            raise ConfigError("v_end must be >= 0", "trajectory.segments")
        if self.ramp_x < 0 or self.ramp_y < 0:
            raise ConfigError("ramps must be >= 0", "trajectory.segments")


@dataclass(frozen=True)
class Plan:
    """Sampled plan on a uniform grid starting at t = 0."""

    t: np.ndarray
    v_target: np.ndarray
    a_x: np.ndarray
    a_y: np.ndarray
    phase: tuple[str, ...]

    def __post_init__(self):
        n = len(self.t)
        if n == 0:
            raise ConfigError("trajectory is empty", "trajectory")
        if not (len(self.v_target) == len(self.a_x) == len(self.a_y) == len(self.phase) == n):
            raise ConfigError("trajectory columns differ in length", "trajectory")
        if n > 1 and np.any(np.diff(self.t) <= 0):
            raise ConfigError("time must be strictly increasing", "trajectory.t")
        if np.any(self.v_target < 0):
            raise ConfigError("v_target must be >= 0", "trajectory.v_target")

    @property
    def duration(self) -> float:
        return float(self.t[-1])

    def _index(self, t: float) -> int:
        i = int(np.searchsorted(self.t, t, side="right")) - 1
        return min(max(i, 0), len(self.t) - 1)

    def sample(self, t: float) -> tuple[float, float, float, str]:
        """Linear interpolation of (v_target, a_x, a_y) and the phase at ``t``."""
        v = float(np.interp(t, self.t, self.v_target))
        ax = float(np.interp(t, self.t, self.a_x))
        ay = float(np.interp(t, self.t, self.a_y))
        return v, ax, ay, self.phase[self._index(t)]

    def preview(self, t: float, horizon: float, step: float = 0.05) -> Trajectory:
        offsets = np.arange(0.0, horizon + 1e-9, step)
        ts = t + offsets
        v = np.interp(ts, self.t, self.v_target)
        ax = np.interp(ts, self.t, self.a_x)
        ay = np.interp(ts, self.t, self.a_y)
        return Trajectory(tuple(TrajectoryPoint(float(o), float(vi), float(yi), float(xi))
                                for o, vi, yi, xi in zip(offsets, v, ay, ax)))


def plan_from_segments(v0: float, segments: list[Segment], dt: float = PLAN_DT,
                       max_duration: float = 600.0) -> Plan:
    if not segments:
        raise ConfigError("trajectory is empty", "trajectory.segments")
    ts, vs, axs, ays, phases = [0.0], [v0], [0.0], [0.0], [segments[0].phase]
    t, v, ax, ay = 0.0, v0, 0.0, 0.0
    for k, seg in enumerate(segments):
        ax0, ay0, t0 = ax, ay, t
        while True:
            elapsed = t - t0
            if seg.duration is not None and elapsed >= seg.duration - 1e-9:
                break
            if seg.v_end is not None and ((seg.a_x < 0 and v <= seg.v_end)
                                          or (seg.a_x > 0 and v >= seg.v_end)
                                          or seg.a_x == 0):
                break
            if t > max_duration:
                raise ConfigError(f"segment {k} never finishes", f"trajectory.segments[{k}]")
            e = elapsed + dt
            ax = seg.a_x if seg.ramp_x <= 0 else ax0 + (seg.a_x - ax0) * min(e / seg.ramp_x, 1.0)
            ay = seg.a_y if seg.ramp_y <= 0 else ay0 + (seg.a_y - ay0) * min(e / seg.ramp_y, 1.0)
            v = max(v + ax * dt, 0.0)
            if v == 0.0:
                ax = 0.0
            t += dt
            ts.append(t)
            vs.append(v)
            axs.append(ax)
            ays.append(ay)
            phases.append(seg.phase)
    axs[0] = axs[1] if len(axs) > 1 else 0.0
    ays[0] = ays[1] if len(ays) > 1 else 0.0
    return Plan(np.array(ts), np.array(vs), np.array(axs), np.array(ays), tuple(phases))


def plan_from_csv(path: str | Path) -> Plan:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
    except FileNotFoundError:
        raise ConfigError("file not found", f"trajectory.file ({path})") from None
    if not rows:
        raise ConfigError("trajectory is empty", f"trajectory.file ({path})")
    try:
        t = np.array([float(r["t"]) for r in rows])
        v = np.array([float(r["v_target"]) for r in rows])
        ay = np.array([float(r.get("a_y_planned") or 0.0) for r in rows])
        ax = np.array([float(r.get("a_x_planned") or 0.0) for r in rows])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad column: {exc}", f"trajectory.file ({path})") from None
    phase = tuple(r.get("phase") or "run" for r in rows)
    return Plan(t, v, ax, ay, phase)


@dataclass(frozen=True)
class TrajectorySpec:
    generator: str = "segments"
    segments: tuple[Segment, ...] = ()
    file: str | None = None

    def __post_init__(self):
        if self.generator not in ("segments", "file"):
            raise ConfigError(f"unknown generator {self.generator!r}", "trajectory.generator")
        if self.generator == "file" and not self.file:
            raise ConfigError("file generator needs a file", "trajectory.file")
        if self.generator == "segments" and not self.segments:
            raise ConfigError("trajectory is empty", "trajectory.segments")

    def build(self, v0: float, base_dir: Path | None = None) -> Plan:
        if self.generator == "file":
            path = Path(self.file)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return plan_from_csv(path)
        return plan_from_segments(v0, list(self.segments))


def trajectory_spec_from_dict(data: dict, path: str = "trajectory") -> TrajectorySpec:
    if not isinstance(data, dict):
        raise ConfigError("expected a table", path)
    data = dict(data)
    if "file" in data and "generator" not in data:
        data["generator"] = "file"
    return build(TrajectorySpec, data, path)


_BUILTIN_PACKAGE = "longctrl.data.scenarios"


def builtin_names() -> list[str]:
    files = resources.files(_BUILTIN_PACKAGE)
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".toml"))


def builtin_text(name: str) -> str:
    if name not in builtin_names():
        raise ConfigError(f"unknown built-in scenario {name!r}", "scenario")
    return resources.files(_BUILTIN_PACKAGE).joinpath(f"{name}.toml").read_text()


def load_scenario_dict(source: str | Path) -> tuple[dict, Path | None]:
    """Parse a scenario file, or a built-in referenced by name (``builtin:<name>`` or bare)."""
    text = str(source)
    if text.startswith("builtin:"):
        name = text.split(":", 1)[1]
        return loads_toml(builtin_text(name), f"builtin:{name}"), None
    path = Path(text)
    if not path.exists() and text in builtin_names():
        return loads_toml(builtin_text(text), f"builtin:{text}"), None
    return load_toml(path), path.parent
