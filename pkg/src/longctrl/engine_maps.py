"""Default engine characteristics.

One analytic engine description feeds both the plant's forward torque map and
the controller's inverse throttle map, so the two are consistent up to table
resolution. Net torque over throttle ``th`` at speed ``n``::

    T(th, n) = (T_max(n) + T_drag(n)) * (1 - (1 - th)**2) - T_drag(n)

All numbers are desk assumptions for a ~400 kW turbocharged racing engine.
"""

from __future__ import annotations

import math

from .force_controller import EngineCharacteristics
from .primitives import Table1D, Table2D

RPM_AXIS = (1000.0, 2000.0, 3000.0, 4000.0, 5000.0, 6000.0, 7000.0, 8000.0, 9000.0, 10000.0)
TORQUE_MAX = (120.0, 200.0, 300.0, 420.0, 500.0, 530.0, 540.0, 520.0, 470.0, 400.0)
TORQUE_DRAG = (15.0, 22.0, 28.0, 34.0, 40.0, 47.0, 54.0, 61.0, 68.0, 75.0)
THROTTLE_AXIS = (0.0, 0.01, 0.02, 0.035, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5,
                 0.6, 0.7, 0.8, 0.9, 1.0)
TORQUE_AXIS = tuple(float(t) for t in range(-80, 561, 10))


def torque_max_curve() -> Table1D:
    return Table1D(RPM_AXIS, TORQUE_MAX, "engine.torque_max_curve")


def drag_torque_curve() -> Table1D:
    return Table1D(RPM_AXIS, TORQUE_DRAG, "engine.drag_torque_curve")


def _shape(th: float) -> float:
    return 1.0 - (1.0 - th) ** 2


def _inverse_shape(x: float) -> float:
    x = min(max(x, 0.0), 1.0)
    return 1.0 - math.sqrt(1.0 - x)


def net_torque(throttle: float, rpm: float) -> float:
    t_max, t_drag = torque_max_curve()(rpm), drag_torque_curve()(rpm)
    return (t_max + t_drag) * _shape(throttle) - t_drag


def plant_torque_map() -> Table2D:
    """Forward map (throttle, rpm) -> net engine torque, N*m."""
    grid = []
    for th in THROTTLE_AXIS:
        grid.append([(tm + td) * _shape(th) - td for tm, td in zip(TORQUE_MAX, TORQUE_DRAG)])
    return Table2D(THROTTLE_AXIS, RPM_AXIS, grid, "plant.engine_torque_map")


def inverse_throttle_map() -> Table2D:
    """Inverse map (torque, rpm) -> throttle."""
    grid = []
    for torque in TORQUE_AXIS:
        grid.append([_inverse_shape((torque + td) / (tm + td))
                     for tm, td in zip(TORQUE_MAX, TORQUE_DRAG)])
    return Table2D(TORQUE_AXIS, RPM_AXIS, grid, "engine.throttle_map")


def default_engine() -> EngineCharacteristics:
    return EngineCharacteristics(inverse_throttle_map(), drag_torque_curve(), torque_max_curve())
