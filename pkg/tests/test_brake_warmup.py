import pytest
from hypothesis import given
from hypothesis import strategies as st

from longctrl.brake_warmup import WarmupConfig, WarmupState, merge_warmup, warmup_pressure
from longctrl.core_types import ConfigError

CFG = WarmupConfig(p_warmup=3e5)


def test_all_conditions_met():
    assert warmup_pressure(0.0, 200.0, 0, CFG) == 3e5


def test_hot_disc_latches_off():
    state = WarmupState()
    assert warmup_pressure(0.0, 450.0, 0, CFG, state) == 0.0
    assert warmup_pressure(0.0, 100.0, 0, CFG, state) == 0.0


def test_lap_budget_latches_off():
    state = WarmupState()
    assert warmup_pressure(0.0, 100.0, 2, CFG, state) == 0.0
    assert warmup_pressure(0.0, 100.0, 1, CFG, state) == 0.0


def test_lateral_suppression_not_latched():
    state = WarmupState()
    assert warmup_pressure(6.0, 200.0, 0, CFG, state) == 0.0
    assert warmup_pressure(-6.0, 200.0, 0, CFG, state) == 0.0
    assert warmup_pressure(1.0, 200.0, 0, CFG, state) == 3e5


@pytest.mark.parametrize("target,warm,out", [(0.0, 3e5, 3e5), (5e6, 3e5, 5e6), (3e5, 3e5, 3e5)])
def test_merge_examples(target, warm, out):
    assert merge_warmup(target, warm) == out


@given(a=st.floats(0, 2e7), b=st.floats(0, 2e7))
def test_merge_dominates_both(a, b):
    m = merge_warmup(a, b)
    assert m >= a and m >= b and m in (a, b)


def test_merge_rejects_negative():
    with pytest.raises(ValueError):
        merge_warmup(-1.0, 0.0)


@given(seq=st.lists(st.tuples(st.floats(-20, 20), st.floats(20, 600), st.integers(0, 4)),
                    min_size=1, max_size=40))
def test_output_is_zero_or_p_warmup_and_stays_off(seq):
    state = WarmupState()
    off = False
    for ay, temp, lap in seq:
        p = warmup_pressure(ay, temp, lap, CFG, state)
        assert p in (0.0, CFG.p_warmup)
        off = off or temp >= CFG.temp_target or lap >= CFG.max_laps
        if off:
            assert p == 0.0


def test_config_validation():
    with pytest.raises(ConfigError):
        WarmupConfig(p_warmup=-1.0)
    with pytest.raises(ConfigError):
        WarmupConfig(temp_target=20.0)
