import textwrap

import pytest

from longctrl.config import build, load_toml, loads_toml
from longctrl.core_types import ConfigError
from longctrl.primitives import PidConfig, Table1D
from longctrl.runner import load_scenario, scenario_from_dict

MINIMAL = {"trajectory": {"segments": [{"phase": "cruise", "duration": 1.0}]},
           "initial": {"v0": 10.0, "gear": 2}}


def _with(**sections):
    data = {k: dict(v) if isinstance(v, dict) else v for k, v in MINIMAL.items()}
    data.update(sections)
    return data


def test_minimal_scenario_uses_defaults():
    cfg = scenario_from_dict(_with())
    assert cfg.rates.plant == 1000.0 and cfg.abs.k_decrease == 50.0
    assert cfg.accel_controller.pid.kp == 150.0


def test_partial_section_keeps_defaults():
    cfg = scenario_from_dict(_with(abs={"kappa_threshold": 0.12}))
    assert cfg.abs.kappa_threshold == 0.12 and cfg.abs.rho_initial == 0.7


@pytest.mark.parametrize("data,path", [
    (_with(abs={"kappa_thresh": 0.1}), "abs"),
    (_with(bogus={}), "<root>"),
    (_with(scenario={"duration": "long"}), "scenario.duration"),
    (_with(scenario={"seed": 1.5}), "scenario.seed"),
    (_with(rates={"plant": 1000.0, "longitudinal": 300.0}), "rates.longitudinal"),
    (_with(initial={"v0": 10.0, "gear": 9}), "initial.gear"),
    (_with(vehicle={"m": True}), "vehicle.m"),
    (_with(assertions={"warp_factor": {"max": 1.0}}), "assertions.warp_factor"),
    (_with(assertions={"n_shifts": {}}), "assertions.n_shifts"),
    (_with(gear_shift={"ay_limit_table": {"x": [0, 1], "y": [1]}}),
     "gear_shift.ay_limit_table"),
    ({"initial": {"v0": 1.0}}, "trajectory"),
])
def test_errors_carry_path(data, path):
    with pytest.raises(ConfigError) as exc:
        scenario_from_dict(data)
    assert exc.value.path.startswith(path)
    assert path in str(exc.value)


def test_tables_and_scalars_convert():
    cfg = scenario_from_dict(_with(gear_shift={"ay_limit_table": 9.0}))
    assert cfg.gear_shift.ay_limit(50.0) == 9.0
    cfg = scenario_from_dict(_with(slip={"r_e_curve_front": {"x": [0, 50], "y": [0.28, 0.3]}}))
    assert cfg.slip.r_e_curve_front(25.0) == pytest.approx(0.29)


def test_build_nested_dataclass():
    pid = build(PidConfig, {"kp": 2, "out_min": -1, "out_max": 1}, "pid")
    assert pid.kp == 2.0 and isinstance(pid.kp, float)
    with pytest.raises(ConfigError, match="pid.kp"):
        build(PidConfig, {"kp": "x"}, "pid")


def test_toml_loading(tmp_path):
    path = tmp_path / "s.toml"
    path.write_text(textwrap.dedent("""
        [scenario]
        name = "demo"
        [trajectory]
        file = "plan.csv"
    """))
    (tmp_path / "plan.csv").write_text("t,v_target\n0,5\n1,5\n")
    cfg = load_scenario(path)
    assert cfg.name == "demo" and cfg.build_plan().duration == 1.0
    with pytest.raises(ConfigError):
        loads_toml("x = = 1")
    with pytest.raises(ConfigError):
        load_toml(tmp_path / "none.toml")
    assert Table1D.from_dict({"x": [0, 1], "y": [2, 3]})(0.5) == 2.5
