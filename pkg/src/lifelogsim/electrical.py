"""Electrical primitives: solar-cell harvest current, sensed cell voltage,
piezo transduction, capacitor integration and hysteresis comparators.

All functions are pure; parameters are plain frozen dataclasses so they can
be shared between threads and hashed into configs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


class DomainError(ValueError):
    """Input outside the documented domain of an electrical primitive."""


@dataclass(frozen=True)
class HarvesterParams:
    i_max: float  # A, current at saturation
    l_sat: float  # lux where current saturates
    voc_max: float  # V, sensed-voltage ceiling
    l_knee: float  # lux, knee of the log voltage curve

    def __post_init__(self):
        for name in ("i_max", "l_sat", "voc_max", "l_knee"):
            if not getattr(self, name) > 0:
                raise DomainError(f"HarvesterParams.{name} must be > 0")


@dataclass(frozen=True)
class PiezoParams:
    sensitivity: float = 0.400  # V/g

    def __post_init__(self):
        if not self.sensitivity > 0:
            raise DomainError("PiezoParams.sensitivity must be > 0")


@dataclass(frozen=True)
class CapacitorParams:
    capacitance: float = 47e-6  # F
    v_max: float = 5.0  # V

    def __post_init__(self):
        if not self.capacitance > 0:
            raise DomainError("capacitance must be > 0")
        if not self.v_max > 0:
            raise DomainError("v_max must be > 0")


@dataclass(frozen=True)
class ComparatorState:
    v_rise: float
    v_fall: float
    output: bool = False

    def __post_init__(self):
        if not self.v_rise > self.v_fall:
            raise DomainError("comparator needs v_rise > v_fall")


def _check_lux(illuminance):
    if illuminance < 0 or math.isnan(illuminance):
        raise DomainError(f"illuminance must be >= 0, got {illuminance}")


def harvest_current(cell: HarvesterParams, illuminance: float) -> float:
    """Harvested current in amps: linear ramp up to ``l_sat``, flat above."""
    _check_lux(illuminance)
    return cell.i_max * min(1.0, illuminance / cell.l_sat)


def open_circuit_voltage(cell: HarvesterParams, illuminance: float, l_ref: float) -> float:
    """Sensed cell voltage on a log curve normalised to ``voc_max`` at ``l_ref``.

    A small ``l_knee`` makes the curve flatten early (stable reading indoors);
    a large one keeps it responsive across indoor light levels.
    """
    _check_lux(illuminance)
    if not l_ref > 0:
        raise DomainError("l_ref must be > 0")
    v = cell.voc_max * math.log1p(illuminance / cell.l_knee) / math.log1p(l_ref / cell.l_knee)
    return min(max(v, 0.0), cell.voc_max)


def piezo_voltage(p: PiezoParams, accel: float) -> float:
    return p.sensitivity * accel


def capacitor_step(v: float, i_net: float, dt: float, cap: CapacitorParams) -> float:
    """Advance the capacitor voltage by one explicit step, clamped to [0, v_max]."""
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    v_new = v + i_net * dt / cap.capacitance
    if v_new < 0.0:
        return 0.0
    if v_new > cap.v_max:
        return cap.v_max
    return v_new


def comparator_update(c: ComparatorState, v_in: float) -> ComparatorState:
    if v_in >= c.v_rise:
        out = True
    elif v_in <= c.v_fall:
        out = False
    else:
        return c
    if out == c.output:
        return c
    return replace(c, output=out)
