"""Two-comparator state scheduling of the capacitor-powered logger.

The power comparator selects the supply rail (capacitor or battery); the
mode comparator, whose thresholds sit a fixed offset above, wakes the MCU
for one record cycle.  ``baseline_step`` models the single-comparator
circuit in which the capacitor only powers the active bursts.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .electrical import CapacitorParams, ComparatorState, DomainError, capacitor_step, comparator_update


class PowerSource(enum.Enum):
    CAPACITOR = "capacitor"
    BATTERY = "battery"


class McuMode(enum.Enum):
    SLEEP = "sleep"
    ACTIVE = "active"


class Event(enum.Enum):
    RECORD_STARTED = "RecordStarted"
    RECORD_TAKEN = "RecordTaken"
    SWITCHED_TO_CAPACITOR = "SwitchedToCapacitor"
    SWITCHED_TO_BATTERY = "SwitchedToBattery"


@dataclass(frozen=True)
class PowerBudget:
    i_sleep: float = 1e-6
    i_active: float = 300e-6
    i_led: float = 2e-3
    t_record: float = 0.020

    def __post_init__(self):
        if not (self.i_led > self.i_active > self.i_sleep > 0):
            raise DomainError("PowerBudget needs i_led > i_active > i_sleep > 0")
        if not self.t_record > 0:
            raise DomainError("t_record must be > 0")


@dataclass(frozen=True)
class DeviceState:
    power_source: PowerSource
    mcu_mode: McuMode
    v_cap: float
    cmp_power: ComparatorState
    cmp_mode: ComparatorState
    cap: CapacitorParams = CapacitorParams()
    active_elapsed: float = 0.0
    battery_time_accum: float = 0.0

    def __post_init__(self):
        off_rise = self.cmp_mode.v_rise - self.cmp_power.v_rise
        off_fall = self.cmp_mode.v_fall - self.cmp_power.v_fall
        if not (off_rise > 0 and abs(off_rise - off_fall) <= 1e-9):
            raise DomainError("mode thresholds must be the power thresholds plus one positive offset")


def initial_state(
    v_cap: float = 0.0,
    v_fall: float = 2.0,
    v_rise: float = 2.2,
    offset: float = 0.2,
    cap: CapacitorParams = CapacitorParams(),
    baseline: bool = False,
) -> DeviceState:
    """Power-on state: comparators resolved against ``v_cap`` as if it had been
    ramped up from zero, so only rising thresholds already passed count."""
    cmp_power = comparator_update(ComparatorState(v_rise, v_fall), v_cap)
    cmp_mode = comparator_update(ComparatorState(v_rise + offset, v_fall + offset), v_cap)
    # A node that starts above the mode threshold would wake immediately;
    # start it asleep and let the next rising edge wake it.
    cmp_mode = replace(cmp_mode, output=False) if cmp_mode.output else cmp_mode
    if baseline:
        source = PowerSource.BATTERY
    else:
        source = PowerSource.CAPACITOR if cmp_power.output else PowerSource.BATTERY
    return DeviceState(source, McuMode.SLEEP, v_cap, cmp_power, cmp_mode, cap)


def rail_draw(s: DeviceState, budget: PowerBudget) -> float:
    """Current drawn from the capacitor during the next step."""
    if s.power_source is not PowerSource.CAPACITOR:
        return 0.0
    if s.mcu_mode is McuMode.ACTIVE:
        if s.active_elapsed >= budget.t_record:
            return budget.i_active + budget.i_led
        return budget.i_active
    return budget.i_sleep


def _check_step(dt, budget):
    if not dt > 0:
        raise DomainError("dt must be > 0")
    if dt > budget.t_record:
        raise DomainError("dt must not exceed t_record")


def _integrate(s, harvest, dt, budget):
    v = capacitor_step(s.v_cap, harvest - rail_draw(s, budget), dt, s.cap)
    elapsed = s.active_elapsed + dt if s.mcu_mode is McuMode.ACTIVE else s.active_elapsed
    batt = s.battery_time_accum + dt if s.power_source is PowerSource.BATTERY else s.battery_time_accum
    return v, elapsed, batt


def device_step(s: DeviceState, harvest: float, dt: float, budget: PowerBudget):
    """One fixed step of the two-comparator scheduler.

    Returns ``(new_state, events)``.  Transitions on the new capacitor voltage
    are applied in the order: power rise, mode rise, mode fall, power fall.
    """
    _check_step(dt, budget)
    v, elapsed, batt = _integrate(s, harvest, dt, budget)
    pw = comparator_update(s.cmp_power, v)
    md = comparator_update(s.cmp_mode, v)
    source, mode = s.power_source, s.mcu_mode
    events = []

    if pw.output and not s.cmp_power.output:
        source = PowerSource.CAPACITOR
        events.append(Event.SWITCHED_TO_CAPACITOR)
    if md.output and not s.cmp_mode.output:
        mode = McuMode.ACTIVE
        elapsed = 0.0
        events.append(Event.RECORD_STARTED)
    if s.cmp_mode.output and not md.output:
        if mode is McuMode.ACTIVE and elapsed >= budget.t_record:
            events.append(Event.RECORD_TAKEN)
        mode = McuMode.SLEEP
        elapsed = 0.0
    if s.cmp_power.output and not pw.output:
        source = PowerSource.BATTERY
        events.append(Event.SWITCHED_TO_BATTERY)

    new = DeviceState(source, mode, v, pw, md, s.cap, elapsed, batt)
    return new, events


def baseline_step(s: DeviceState, harvest: float, dt: float, budget: PowerBudget):
    """Single-comparator variant: the mode comparator drives both the rail
    switch and the MCU, so every recharge interval runs from the battery."""
    _check_step(dt, budget)
    v, elapsed, batt = _integrate(s, harvest, dt, budget)
    pw = comparator_update(s.cmp_power, v)  # tracked for traces only
    md = comparator_update(s.cmp_mode, v)
    source, mode = s.power_source, s.mcu_mode
    events = []

    if md.output and not s.cmp_mode.output:
        source = PowerSource.CAPACITOR
        mode = McuMode.ACTIVE
        elapsed = 0.0
        events += [Event.SWITCHED_TO_CAPACITOR, Event.RECORD_STARTED]
    elif s.cmp_mode.output and not md.output:
        if mode is McuMode.ACTIVE and elapsed >= budget.t_record:
            events.append(Event.RECORD_TAKEN)
        source = PowerSource.BATTERY
        mode = McuMode.SLEEP
        elapsed = 0.0
        events.append(Event.SWITCHED_TO_BATTERY)

    new = DeviceState(source, mode, v, pw, md, s.cap, elapsed, batt)
    return new, events
