"""Longitudinal control stack for a combustion-engine racecar.

Gear selection with corner preview, brake disc warmup, acceleration and
force control, slip estimation with ABS/TC and a brake pressure controller,
plus a desk-scale drivetrain plant and a multi-rate scenario runner.
"""

from .core_types import (AccelCommand, ActuationCommand, ConfigError, InvalidGearError,
                         Trajectory, TrajectoryPoint, VehicleParams, VehicleState)
from .runner import (Metrics, ScenarioConfig, compute_metrics, load_scenario, run_scenario,
                     scenario_from_dict)
from .scenarios import builtin_names

__version__ = "0.1.0"

__all__ = [
    "AccelCommand", "ActuationCommand", "ConfigError", "InvalidGearError", "Metrics",
    "ScenarioConfig", "Trajectory", "TrajectoryPoint", "VehicleParams", "VehicleState",
    "builtin_names", "compute_metrics", "load_scenario", "run_scenario", "scenario_from_dict",
    "__version__",
]
