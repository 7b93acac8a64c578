import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lifelogsim.electrical import (
    CapacitorParams,
    ComparatorState,
    DomainError,
    HarvesterParams,
    PiezoParams,
    capacitor_step,
    comparator_update,
    harvest_current,
    open_circuit_voltage,
    piezo_voltage,
)

CELL = HarvesterParams(i_max=100e-6, l_sat=200.0, voc_max=2.0, l_knee=10.0)
CAP = CapacitorParams(47e-6, 5.0)


def test_harvest_current_examples():
    assert harvest_current(CELL, 0.0) == 0.0
    assert harvest_current(CELL, 200.0) == CELL.i_max
    assert harvest_current(CELL, 50.0) == pytest.approx(25e-6, rel=1e-12)
    assert harvest_current(CELL, 1e6) == CELL.i_max


def test_open_circuit_voltage_examples():
    assert open_circuit_voltage(CELL, 0.0, 1000.0) == 0.0
    assert open_circuit_voltage(CELL, 1000.0, 1000.0) == pytest.approx(2.0, abs=1e-15)
    v = open_circuit_voltage(CELL, 100.0, 1000.0)
    assert v == pytest.approx(2.0 * math.log(11) / math.log(101), rel=1e-12)
    assert v == pytest.approx(1.039, abs=5e-4)
    # above the reference point the reading saturates at the ceiling
    assert open_circuit_voltage(CELL, 1e5, 1000.0) == 2.0


@pytest.mark.parametrize("fn", [lambda x: harvest_current(CELL, x), lambda x: open_circuit_voltage(CELL, x, 1e3)])
def test_negative_illuminance_rejected(fn):
    with pytest.raises(DomainError):
        fn(-1.0)
    with pytest.raises(DomainError):
        fn(float("nan"))


def test_piezo_examples():
    p = PiezoParams(0.4)
    assert piezo_voltage(p, 1.0) == pytest.approx(0.4)
    assert piezo_voltage(p, 0.0) == 0.0
    assert piezo_voltage(p, 2.5) == pytest.approx(1.0)
    assert piezo_voltage(p, -1.0) == pytest.approx(-0.4)


def test_capacitor_step_examples():
    assert capacitor_step(2.0, 0.0, 0.123, CAP) == 2.0
    assert capacitor_step(1.0, 100e-6, 1.0, CAP) == pytest.approx(1.0 + 100e-6 / 47e-6, rel=1e-12)
    assert capacitor_step(1.0, 100e-6, 1.0, CAP) == pytest.approx(3.1277, abs=1e-4)
    assert capacitor_step(0.05, -100e-6, 1.0, CAP) == 0.0
    assert capacitor_step(4.9, 1e-3, 1.0, CAP) == 5.0
    with pytest.raises(DomainError):
        capacitor_step(1.0, 0.0, 0.0, CAP)


def test_comparator_examples():
    c = ComparatorState(2.2, 2.0)
    up = comparator_update(c, 2.21)
    assert up.output
    assert comparator_update(up, 2.1).output
    assert not comparator_update(up, 1.99).output
    assert comparator_update(up, 2.1) is up


def test_parameter_invariants():
    with pytest.raises(DomainError):
        ComparatorState(2.0, 2.0)
    with pytest.raises(DomainError):
        HarvesterParams(0.0, 1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        PiezoParams(0.0)
    with pytest.raises(DomainError):
        CapacitorParams(-1.0, 5.0)


@given(st.lists(st.floats(0.0, 5.0), max_size=200))
def test_toggles_never_exceed_threshold_crossings(vs):
    c = ComparatorState(2.2, 2.0)
    toggles = crossings = 0
    prev_v = 0.0
    for v in vs:
        n = comparator_update(c, v)
        toggles += n.output != c.output
        crossings += (prev_v < 2.2 <= v) + (prev_v > 2.0 >= v)
        c, prev_v = n, v
    assert toggles <= crossings


def test_ramp_up_then_down_toggles_twice():
    c = ComparatorState(2.2, 2.0)
    ramp = [i * 0.001 for i in range(3001)]
    outs = []
    for v in ramp + ramp[::-1]:
        c = comparator_update(c, v)
        outs.append(c.output)
    edges = [(a, b) for a, b in zip(outs, outs[1:]) if a != b]
    assert edges == [(False, True), (True, False)]


@given(st.floats(0.0, 4.0), st.floats(-1e-4, 1e-4), st.floats(1e-5, 1e-2))
def test_capacitor_step_linear_in_dt(v, i, dt):
    once = capacitor_step(v, i, 2 * dt, CAP)
    if 0.0 < once < CAP.v_max:
        half = capacitor_step(v, i, dt, CAP)
        assert capacitor_step(half, i, dt, CAP) == pytest.approx(once, abs=1e-12)


def test_cell_models_monotone():
    rng = np.random.default_rng(0)
    for a, b in rng.uniform(0.0, 1e5, (1000, 2)) * rng.choice([1e-4, 1e-2, 1.0], (1000, 1)):
        lo, hi = min(a, b), max(a, b)
        assert harvest_current(CELL, lo) <= harvest_current(CELL, hi)
        assert open_circuit_voltage(CELL, lo, 2e4) <= open_circuit_voltage(CELL, hi, 2e4)


@given(st.floats(-10, 10), st.floats(-10, 10))
def test_piezo_homogeneous(k, a):
    p = PiezoParams(0.4)
    assert piezo_voltage(p, k * a) == pytest.approx(k * piezo_voltage(p, a), rel=1e-12, abs=1e-300)
