"""Multi-rate closed-loop scenario runner.

Every plant tick the runner checks which controllers are due, lets them read
the latest measurement snapshot and holds their outputs until their next tick
(zero-order hold). One log row is written per plant tick: the snapshot the
controllers saw at time ``t``, the commands issued at ``t`` and the true plant
quantities at ``t``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .accel_controller import AccelCtrlConfig, AccelCtrlState, accel_controller_step
from .brake_pressure import BpcConfig, BpcState, bpc_step
from .brake_warmup import WarmupConfig, WarmupState, warmup_pressure
from .config import build
from .core_types import ActuationCommand, AccelCommand, ConfigError, VehicleParams
from .engine_maps import default_engine
from .force_controller import (EngineCharacteristics, ForceCtrlConfig, ForceCtrlState,
                               brake_force_from_pressures, force_controller_step)
from .gear_shift import GearShiftConfig, GearShiftState, decide_gear
from .plant import PlantConfig, initial_state, measure, plant_step
from .scenarios import Plan, TrajectorySpec, load_scenario_dict, trajectory_spec_from_dict
from .slip import SlipConfig, SlipState, estimate
from .stability import AbsConfig, StabilityController, TcConfig


@dataclass(frozen=True)
class Rates:
    plant: float = 1000.0
    bpc: float = 1000.0
    longitudinal: float = 100.0
    gear: float = 50.0
    warmup: float = 10.0

    def __post_init__(self):
        for name in ("plant", "bpc", "longitudinal", "gear", "warmup"):
            rate = getattr(self, name)
            if not rate > 0:
                raise ConfigError("must be > 0", f"rates.{name}")
            if rate > self.plant:
                raise ConfigError("must not exceed the plant rate", f"rates.{name}")
            ratio = self.plant / rate
            if abs(ratio - round(ratio)) > 1e-9:
                raise ConfigError("plant rate must be an integer multiple of it", f"rates.{name}")

    def divider(self, name: str) -> int:
        return int(round(self.plant / getattr(self, name)))


@dataclass(frozen=True)
class InitialConditions:
    v0: float = 0.0
    gear: int = 1
    disc_temp: float | None = None
    throttle: float = 0.0

    def __post_init__(self):
        if self.v0 < 0:
            raise ConfigError("must be >= 0", "initial.v0")
        if not 0.0 <= self.throttle <= 1.0:
            raise ConfigError("must lie in [0, 1]", "initial.throttle")


@dataclass(frozen=True)
class CommandConfig:
    """Stand-in for the trajectory-tracking controller.

    ``replay`` passes the planned a_x through; ``velocity`` adds
    ``k_v * (v_target - v_est)`` and clamps to ``[a_min, a_max]``.
    """

    source: str = "replay"
    k_v: float = 1.0
    a_min: float = -30.0
    a_max: float = 10.0

    def __post_init__(self):
        if self.source not in ("replay", "velocity"):
            raise ConfigError(f"unknown source {self.source!r}", "command.source")
        if self.k_v < 0:
            raise ConfigError("must be >= 0", "command.k_v")
        if not self.a_min < self.a_max:
            raise ConfigError("a_min must be < a_max", "command.a_min")


@dataclass(frozen=True)
class MetricsConfig:
    rms_phases: tuple[str, ...] = ()
    slip_v_min: float = 2.0
    disc_temp_target: float = 450.0
    brake_phase: str = "brake"


@dataclass(frozen=True)
class Assertion:
    metric: str
    max: float | None = None
    min: float | None = None

    def __post_init__(self):
        if self.max is None and self.min is None:
            raise ConfigError("needs max or min", f"assertions.{self.metric}")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "scenario"
    description: str = ""
    duration: float = 10.0
    seed: int | None = None
    stop_speed: float | None = None
    output_dir: str | None = None
    trajectory: TrajectorySpec | None = None
    initial: InitialConditions = field(default_factory=InitialConditions)
    command: CommandConfig = field(default_factory=CommandConfig)
    rates: Rates = field(default_factory=Rates)
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    plant: PlantConfig = field(default_factory=PlantConfig)
    engine: EngineCharacteristics = field(default_factory=default_engine)
    gear_shift: GearShiftConfig = field(default_factory=GearShiftConfig)
    brake_warmup: WarmupConfig = field(default_factory=WarmupConfig)
    accel_controller: AccelCtrlConfig = field(default_factory=AccelCtrlConfig)
    force_controller: ForceCtrlConfig = field(default_factory=ForceCtrlConfig)
    slip: SlipConfig = field(default_factory=SlipConfig)
    abs: AbsConfig = field(default_factory=AbsConfig)
    tc: TcConfig = field(default_factory=TcConfig)
    brake_pressure_controller: BpcConfig = field(default_factory=BpcConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    assertions: tuple[Assertion, ...] = ()
    base_dir: Path | None = None

    def __post_init__(self):
        if not self.duration > 0:
            raise ConfigError("must be > 0", "scenario.duration")
        if self.trajectory is None:
            raise ConfigError("missing section", "trajectory")
        if not 1 <= self.initial.gear <= self.vehicle.n_gears:
            raise ConfigError(f"gear {self.initial.gear} not in 1..{self.vehicle.n_gears}",
                              "initial.gear")

    def build_plan(self) -> Plan:
        return self.trajectory.build(self.initial.v0, self.base_dir)


_SECTIONS = {
    "initial": InitialConditions, "command": CommandConfig, "rates": Rates,
    "vehicle": VehicleParams, "plant": PlantConfig, "engine": EngineCharacteristics,
    "gear_shift": GearShiftConfig, "brake_warmup": WarmupConfig,
    "accel_controller": AccelCtrlConfig, "force_controller": ForceCtrlConfig,
    "slip": SlipConfig, "abs": AbsConfig, "tc": TcConfig,
    "brake_pressure_controller": BpcConfig, "metrics": MetricsConfig,
}
_SCENARIO_KEYS = ("name", "description", "duration", "seed", "stop_speed", "output_dir")


def scenario_from_dict(data: dict, base_dir: Path | None = None) -> ScenarioConfig:
    """Build a validated :class:`ScenarioConfig` from a parsed scenario file."""
    unknown = sorted(set(data) - set(_SECTIONS) - {"scenario", "trajectory", "assertions"})
    if unknown:
        raise ConfigError(f"unknown section(s) {', '.join(unknown)}", "<root>")
    head = data.get("scenario", {})
    if not isinstance(head, dict):
        raise ConfigError("expected a table", "scenario")
    bad = sorted(set(head) - set(_SCENARIO_KEYS))
    if bad:
        raise ConfigError(f"unknown key(s) {', '.join(bad)}", "scenario")
    kwargs: dict = {}
    for key in _SCENARIO_KEYS:
        if key in head:
            kwargs[key] = head[key]
    for key in ("duration", "stop_speed"):
        if key in kwargs and (isinstance(kwargs[key], bool)
                              or not isinstance(kwargs[key], (int, float))):
            raise ConfigError("expected a number", f"scenario.{key}")
    if "seed" in kwargs and (isinstance(kwargs["seed"], bool)
                             or not isinstance(kwargs["seed"], int)):
        raise ConfigError("expected an integer", "scenario.seed")
    for key in ("name", "description", "output_dir"):
        if key in kwargs and not isinstance(kwargs[key], str):
            raise ConfigError("expected a string", f"scenario.{key}")
    if "trajectory" not in data:
        raise ConfigError("missing section", "trajectory")
    kwargs["trajectory"] = trajectory_spec_from_dict(data["trajectory"])
    defaults = ScenarioConfig(trajectory=kwargs["trajectory"])
    for name, cls in _SECTIONS.items():
        if name in data:
            kwargs[name] = build(cls, data[name], name, base=getattr(defaults, name))
    raw = data.get("assertions", {})
    if not isinstance(raw, dict):
        raise ConfigError("expected a table of metric bounds", "assertions")
    kwargs["assertions"] = tuple(build(Assertion, {"metric": k, **v}, f"assertions.{k}")
                                 for k, v in raw.items())
    for a in kwargs["assertions"]:
        if a.metric not in METRIC_NAMES:
            raise ConfigError(f"unknown metric {a.metric!r}", f"assertions.{a.metric}")
    try:
        cfg = ScenarioConfig(base_dir=base_dir, **kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), "scenario") from None
    cfg.build_plan()
    return cfg


def load_scenario(source) -> ScenarioConfig:
    data, base_dir = load_scenario_dict(source)
    return scenario_from_dict(data, base_dir)


LOG_COLUMNS = (
    "t", "phase", "v", "v_est", "v_target", "v_blend", "distance",
    "a_x_target", "a_x_meas", "a_x_planned", "a_y_meas", "a_y_planned", "ay_limit",
    "F_x_target", "F_feedforward", "F_feedback", "force_mode", "drag_force",
    "throttle_force", "throttle_cmd", "throttle_meas", "torque_actual",
    "p_hyd_front", "p_hyd_rear", "p_warmup",
    "p_force_front", "p_force_rear", "p_abs_front", "p_abs_rear",
    "p_target_front", "p_target_rear",
    "p_cmd_front", "p_cmd_rear", "p_meas_front", "p_meas_rear", "F_x_est",
    "gear_request", "gear_engaged", "engine_speed",
    "kappa_fl", "kappa_fr", "kappa_rl", "kappa_rr", "kappa_true_front", "kappa_true_rear",
    "k_blend", "abs_front", "abs_rear", "tc", "rho_abs_front", "rho_abs_rear", "rho_tc",
    "disc_temp_front", "disc_temp_rear", "lap_count",
    "tick_long", "tick_gear", "tick_warmup", "tick_bpc",
    "obs_t_long", "obs_t_gear", "obs_t_warmup", "obs_t_bpc",
)
_STRING_COLUMNS = {"phase", "force_mode", "abs_front", "abs_rear", "tc"}


class Log:
    """Column store with one row per plant tick."""

    def __init__(self, columns=LOG_COLUMNS):
        self.columns = tuple(columns)
        self.data: dict[str, list] = {c: [] for c in self.columns}

    def append(self, row: dict) -> None:
        for c in self.columns:
            self.data[c].append(row[c])

    def __len__(self) -> int:
        return len(self.data[self.columns[0]])

    def __getitem__(self, name: str) -> np.ndarray:
        values = self.data[name]
        if name in _STRING_COLUMNS:
            return np.asarray(values, dtype=object)
        return np.asarray(values, dtype=float)

    @classmethod
    def from_columns(cls, columns: dict) -> "Log":
        log = cls(tuple(columns))
        log.data = {k: list(v) for k, v in columns.items()}
        return log


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_timeseries(log: Log, path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(log.columns)
        cols = [log.data[c] for c in log.columns]
        for row in zip(*cols):
            writer.writerow([_fmt(v) for v in row])


def read_timeseries(path: str | Path) -> Log:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        cols: dict[str, list] = {h: [] for h in header}
        for row in reader:
            for h, v in zip(header, row):
                cols[h].append(v if h in _STRING_COLUMNS else float(v))
    return Log.from_columns(cols)


@dataclass
class Metrics:
    rms_ax_error: float = 0.0
    rms_v_error: float = 0.0
    max_abs_slip: list[float] = field(default_factory=lambda: [0.0] * 4)
    max_abs_slip_true_front: float = 0.0
    max_abs_slip_true_rear: float = 0.0
    shifts_during_ay_limit: int = 0
    n_shifts: int = 0
    time_to_disc_temp: float | None = None
    # completed laps at that moment
    lap_at_disc_temp: int | None = None
    abs_windows: list[list[float]] = field(default_factory=list)
    tc_windows: list[list[float]] = field(default_factory=list)
    stopping_distance: float | None = None
    duration: float = 0.0
    final_v: float = 0.0
    final_gear: int = 0
    final_engine_speed: float = 0.0
    max_disc_temp: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)

    def scalar(self, name: str) -> float:
        value = getattr(self, name)
        if isinstance(value, list):
            if value and isinstance(value[0], list):
                return float(len(value))
            return float(max(value)) if value else 0.0
        if value is None:
            return math.inf
        return float(value)


METRIC_NAMES = tuple(Metrics.__dataclass_fields__)


def _windows(t: np.ndarray, modes: np.ndarray, dt: float) -> list[list[float]]:
    out: list[list[float]] = []
    start = None
    for ti, m in zip(t, modes):
        on = m == "active"
        if on and start is None:
            start = float(ti)
        elif not on and start is not None:
            out.append([start, float(ti)])
            start = None
    if start is not None:
        out.append([start, float(t[-1] + dt)])
    return out


def compute_metrics(log: Log, cfg: MetricsConfig | None = None) -> Metrics:
    """Summary metrics of a run. RMS values use only rows in ``cfg.rms_phases``
    (all rows when empty)."""
    if len(log) == 0:
        raise ValueError("empty log")
    cfg = cfg or MetricsConfig()
    t = log["t"]
    dt = float(t[1] - t[0]) if len(t) > 1 else 0.0
    phase = log["phase"]
    mask = np.ones(len(t), dtype=bool)
    if cfg.rms_phases:
        mask = np.isin(phase, list(cfg.rms_phases))
    m = Metrics()
    if mask.any():
        ax_err = log["a_x_target"][mask] - log["a_x_meas"][mask]
        v_err = log["v_target"][mask] - log["v"][mask]
        m.rms_ax_error = float(np.sqrt(np.mean(ax_err ** 2)))
        m.rms_v_error = float(np.sqrt(np.mean(v_err ** 2)))
    m.max_abs_slip = [float(np.max(np.abs(log[c])))
                      for c in ("kappa_fl", "kappa_fr", "kappa_rl", "kappa_rr")]
    moving = log["v"] >= cfg.slip_v_min
    if moving.any():
        m.max_abs_slip_true_front = float(np.max(np.abs(log["kappa_true_front"][moving])))
        m.max_abs_slip_true_rear = float(np.max(np.abs(log["kappa_true_rear"][moving])))
    gear = log["gear_request"]
    changed = np.zeros(len(t), dtype=bool)
    changed[1:] = gear[1:] != gear[:-1]
    over = np.abs(log["a_y_meas"]) > log["ay_limit"]
    m.n_shifts = int(changed.sum())
    m.shifts_during_ay_limit = int((changed & over).sum())
    hot = np.minimum(log["disc_temp_front"], log["disc_temp_rear"]) >= cfg.disc_temp_target
    if hot.any():
        m.time_to_disc_temp = float(t[np.argmax(hot)])
        m.lap_at_disc_temp = int(log["lap_count"][np.argmax(hot)])
    m.abs_windows = _windows(t, log["abs_front"], dt) + _windows(t, log["abs_rear"], dt)
    m.abs_windows.sort()
    m.tc_windows = _windows(t, log["tc"], dt)
    braking = phase == cfg.brake_phase
    if braking.any():
        d = log["distance"]
        m.stopping_distance = float(d[-1] - d[np.argmax(braking)])
    m.duration = float(t[-1] + dt)
    m.final_v = float(log["v"][-1])
    m.final_gear = int(log["gear_engaged"][-1])
    m.final_engine_speed = float(log["engine_speed"][-1])
    m.max_disc_temp = float(max(np.max(log["disc_temp_front"]), np.max(log["disc_temp_rear"])))
    return m


def check_assertions(metrics: Metrics, assertions) -> list[str]:
    failures = []
    for a in assertions:
        value = metrics.scalar(a.metric)
        if a.max is not None and not value <= a.max:
            failures.append(f"{a.metric} = {value:.6g} exceeds max {a.max:g}")
        if a.min is not None and not value >= a.min:
            failures.append(f"{a.metric} = {value:.6g} below min {a.min:g}")
    return failures


def write_metrics(metrics: Metrics, path: str | Path, failures=()) -> None:
    payload = metrics.as_dict()
    payload["assertion_failures"] = list(failures)
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _velocity_command(cfg: CommandConfig, a_plan: float, v_target: float, v: float) -> float:
    if cfg.source == "replay":
        return a_plan
    a = a_plan + cfg.k_v * (v_target - v)
    return min(max(a, cfg.a_min), cfg.a_max)


def run_scenario(cfg: ScenarioConfig, seed: int | None = None) -> tuple[Log, Metrics]:
    """Run the closed loop for ``cfg.duration`` seconds (or until ``stop_speed``)."""
    seed = cfg.seed if seed is None else seed
    rng = np.random.default_rng(seed) if seed is not None else None
    rates = cfg.rates
    dt = 1.0 / rates.plant
    params = cfg.vehicle
    plant_cfg = replace(cfg.plant, dt=dt)
    plan = cfg.build_plan()
    div = {name: rates.divider(name) for name in ("bpc", "longitudinal", "gear", "warmup")}
    dt_long = div["longitudinal"] * dt
    dt_bpc = div["bpc"] * dt

    init = cfg.initial
    ps = initial_state(init.v0, init.gear, params, plant_cfg, init.disc_temp, init.throttle)
    vs = measure(ps, plant_cfg, params, rng)

    gear_state = GearShiftState(current_request=init.gear)
    warm_state = WarmupState()
    accel_state = AccelCtrlState()
    force_state = ForceCtrlState()
    slip_state = SlipState(v_blend=init.v0, v_front_wheels=init.v0)
    stab = StabilityController(cfg.abs, cfg.tc)
    bpc_f, bpc_r = BpcState(), BpcState()

    gear_req = init.gear
    p_warm = 0.0
    throttle = init.throttle
    p_t_f = p_t_r = 0.0
    p_cmd_f = p_cmd_r = 0.0
    slips = (0.0, 0.0, 0.0, 0.0)
    v_blend = init.v0
    a_target = F = F_x_est = 0.0
    fo = None
    obs = {"long": -1.0, "gear": -1.0, "warmup": -1.0, "bpc": -1.0}

    log = Log()
    n_steps = int(round(cfg.duration * rates.plant))
    for i in range(n_steps):
        t = i * dt
        v_tgt, a_plan, a_y_plan, phase = plan.sample(t)
        due = {"long": i % div["longitudinal"] == 0, "gear": i % div["gear"] == 0,
               "warmup": i % div["warmup"] == 0, "bpc": i % div["bpc"] == 0}

        if due["warmup"]:
            p_warm = warmup_pressure(a_y_plan, min(vs.disc_temp_front, vs.disc_temp_rear),
                                     vs.lap_count, cfg.brake_warmup, warm_state)
            obs["warmup"] = vs.t
        if due["gear"]:
            preview = plan.preview(t, cfg.gear_shift.horizon_length)
            gear_req = decide_gear(gear_state, vs, preview, cfg.gear_shift, params)
            obs["gear"] = vs.t
        if due["long"]:
            slips, v_blend = estimate(vs, dt_long, cfg.slip, params, slip_state)
            a_target = _velocity_command(cfg.command, a_plan, v_tgt, vs.v_est)
            F = accel_controller_step(AccelCommand(a_target), vs, dt_long, cfg.accel_controller,
                                      params, accel_state)
            fo = force_controller_step(F, vs, p_warm, dt_long, cfg.force_controller, params,
                                       cfg.engine, force_state, a_x_target=a_target)
            F_x_est = (brake_force_from_pressures(vs.p_brake_meas_front, vs.p_brake_meas_rear,
                                                  params) + fo.drag_force)
            throttle, p_t_f, p_t_r = stab.step(t, fo.throttle, fo.p_front, fo.p_rear, slips,
                                               F_x_est, v_blend, dt_long)
            p_t_f = min(max(p_t_f, 0.0), params.p_brake_max)
            p_t_r = min(max(p_t_r, 0.0), params.p_brake_max)
            throttle = min(max(throttle, 0.0), 1.0)
            obs["long"] = vs.t
        if due["bpc"]:
            p_cmd_f = bpc_step(p_t_f, vs.p_brake_meas_front, dt_bpc,
                               cfg.brake_pressure_controller, bpc_f)
            p_cmd_r = bpc_step(p_t_r, vs.p_brake_meas_rear, dt_bpc,
                               cfg.brake_pressure_controller, bpc_r)
            p_cmd_f = min(max(p_cmd_f, 0.0), params.p_brake_max)
            p_cmd_r = min(max(p_cmd_r, 0.0), params.p_brake_max)
            obs["bpc"] = vs.t

        log.append({
            "t": t, "phase": phase, "v": ps.v, "v_est": vs.v_est, "v_target": v_tgt,
            "v_blend": v_blend, "distance": ps.distance,
            "a_x_target": a_target, "a_x_meas": vs.a_x_meas, "a_x_planned": a_plan,
            "a_y_meas": vs.a_y_meas, "a_y_planned": a_y_plan,
            "ay_limit": cfg.gear_shift.ay_limit(max(vs.v_est, 0.0)),
            "F_x_target": F, "F_feedforward": accel_state.last_feedforward,
            "F_feedback": accel_state.last_feedback,
            "force_mode": fo.mode.value if fo else "coast",
            "drag_force": fo.drag_force if fo else 0.0,
            "throttle_force": fo.throttle if fo else 0.0, "throttle_cmd": throttle,
            "throttle_meas": vs.throttle_meas, "torque_actual": ps.torque_actual,
            "p_hyd_front": fo.hydraulic_front if fo else 0.0,
            "p_hyd_rear": fo.hydraulic_rear if fo else 0.0, "p_warmup": p_warm,
            "p_force_front": fo.p_front if fo else 0.0, "p_force_rear": fo.p_rear if fo else 0.0,
            "p_abs_front": stab.last_abs[0], "p_abs_rear": stab.last_abs[1],
            "p_target_front": p_t_f, "p_target_rear": p_t_r,
            "p_cmd_front": p_cmd_f, "p_cmd_rear": p_cmd_r,
            "p_meas_front": vs.p_brake_meas_front, "p_meas_rear": vs.p_brake_meas_rear,
            "F_x_est": F_x_est,
            "gear_request": gear_req, "gear_engaged": vs.gear_engaged,
            "engine_speed": vs.engine_speed,
            "kappa_fl": slips[0], "kappa_fr": slips[1], "kappa_rl": slips[2],
            "kappa_rr": slips[3],
            "kappa_true_front": ps.kappa_front, "kappa_true_rear": ps.kappa_rear,
            "k_blend": slip_state.k_filtered,
            "abs_front": stab.abs_front.mode.value, "abs_rear": stab.abs_rear.mode.value,
            "tc": stab.tc.mode.value, "rho_abs_front": stab.abs_front.rho,
            "rho_abs_rear": stab.abs_rear.rho, "rho_tc": stab.tc.rho,
            "disc_temp_front": ps.disc_temp_front, "disc_temp_rear": ps.disc_temp_rear,
            "lap_count": ps.lap_count,
            "tick_long": int(due["long"]), "tick_gear": int(due["gear"]),
            "tick_warmup": int(due["warmup"]), "tick_bpc": int(due["bpc"]),
            "obs_t_long": obs["long"], "obs_t_gear": obs["gear"],
            "obs_t_warmup": obs["warmup"], "obs_t_bpc": obs["bpc"],
        })

        cmd = ActuationCommand(throttle, p_cmd_f, p_cmd_r, gear_req)
        vs = plant_step(cmd, dt, plant_cfg, params, ps, rng,
                        lateral_accel=_lateral(a_y_plan, ps.v, v_tgt))
        if cfg.stop_speed is not None and ps.v <= cfg.stop_speed and t > 0.5:
            break

    return log, compute_metrics(log, cfg.metrics)


def _lateral(a_y_plan: float, v: float, v_target: float) -> float:
    # the path curvature is fixed by the plan, so a_y scales with v^2
    if v_target <= 0.1:
        return 0.0
    return a_y_plan * (v / v_target) ** 2
