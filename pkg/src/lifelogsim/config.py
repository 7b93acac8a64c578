"""Device configuration and its ``key = value`` text format.

Values may carry SI-prefixed units, e.g. ``capacitance = 47uF``,
``t_record = 20ms``, ``piezo_sensitivity = 400mV/g``.  A bare number is
taken in the base unit.  Unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass
from importlib import resources

from .electrical import CapacitorParams, DomainError, HarvesterParams, PiezoParams
from .scheduler import PowerBudget


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class DeviceConfig:
    capacitance: float = 47e-6
    v_max: float = 5.0
    v_cap_init: float = 0.0
    power_v_fall: float = 2.0
    power_v_rise: float = 2.2
    mode_offset: float = 0.2
    i_sleep: float = 1e-6
    i_active: float = 300e-6
    i_led: float = 2e-3
    t_record: float = 0.020
    sc1_i_max: float = 126e-6
    sc1_l_sat: float = 5730.0
    sc1_voc_max: float = 2.0
    sc1_l_knee: float = 5.0
    sc2_i_max: float = 166e-6
    sc2_l_sat: float = 5730.0
    sc2_voc_max: float = 3.0
    sc2_l_knee: float = 3000.0
    l_ref: float = 20000.0
    piezo_sensitivity: float = 0.400
    dt: float = 1e-3
    trace_interval: float = 0.1
    session_gap: float = 5.0
    capacity_bytes: int = 32768
    rtc_start_ms: int = 0
    seed: int | None = None

    def __post_init__(self):
        try:
            self.sc1
            self.sc2
            self.piezo
            self.cap
            self.budget
        except DomainError as exc:
            raise ConfigError(str(exc)) from None
        if not self.power_v_rise > self.power_v_fall:
            raise ConfigError("power_v_rise must exceed power_v_fall")
        if not self.mode_offset > 0:
            raise ConfigError("mode_offset must be > 0")
        if not self.power_v_rise + self.mode_offset <= self.v_max:
            raise ConfigError("mode threshold above v_max is unreachable")
        if not 0 <= self.v_cap_init <= self.v_max:
            raise ConfigError("v_cap_init must lie in [0, v_max]")
        if not 0 < self.dt <= self.t_record:
            raise ConfigError("need 0 < dt <= t_record")
        for name in ("trace_interval", "session_gap"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be > 0")
        ratio = self.trace_interval / self.dt
        if abs(ratio - round(ratio)) > 1e-6:
            raise ConfigError("trace_interval must be a whole number of dt steps")
        if not self.l_ref > 0:
            raise ConfigError("l_ref must be > 0")
        if self.capacity_bytes < 18:
            raise ConfigError("capacity_bytes too small for one session")
        if self.rtc_start_ms < 0:
            raise ConfigError("rtc_start_ms must be >= 0")

    @property
    def sc1(self):
        return HarvesterParams(self.sc1_i_max, self.sc1_l_sat, self.sc1_voc_max, self.sc1_l_knee)

    @property
    def sc2(self):
        return HarvesterParams(self.sc2_i_max, self.sc2_l_sat, self.sc2_voc_max, self.sc2_l_knee)

    @property
    def piezo(self):
        return PiezoParams(self.piezo_sensitivity)

    @property
    def cap(self):
        return CapacitorParams(self.capacitance, self.v_max)

    @property
    def budget(self):
        return PowerBudget(self.i_sleep, self.i_active, self.i_led, self.t_record)

    @property
    def steps_per_trace(self) -> int:
        return int(round(self.trace_interval / self.dt))

    def replace(self, **changes) -> "DeviceConfig":
        return dataclasses.replace(self, **changes)


# expected base unit per key; None = dimensionless integer
_UNITS = {
    "capacitance": "F",
    "v_max": "V",
    "v_cap_init": "V",
    "power_v_fall": "V",
    "power_v_rise": "V",
    "mode_offset": "V",
    "i_sleep": "A",
    "i_active": "A",
    "i_led": "A",
    "t_record": "s",
    "sc1_i_max": "A",
    "sc1_l_sat": "lux",
    "sc1_voc_max": "V",
    "sc1_l_knee": "lux",
    "sc2_i_max": "A",
    "sc2_l_sat": "lux",
    "sc2_voc_max": "V",
    "sc2_l_knee": "lux",
    "l_ref": "lux",
    "piezo_sensitivity": "V/g",
    "dt": "s",
    "trace_interval": "s",
    "session_gap": "s",
    "capacity_bytes": "B",
    "rtc_start_ms": None,
    "seed": None,
}
_INT_KEYS = {"capacity_bytes", "rtc_start_ms", "seed"}
_PREFIX = {"p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "m": 1e-3, "": 1.0, "k": 1e3, "M": 1e6}
_VALUE = re.compile(r"^([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(\S*)$")


def parse_quantity(text: str, unit: str | None):
    m = _VALUE.match(text.strip())
    if not m:
        raise ConfigError(f"cannot parse value {text!r}")
    number, suffix = float(m.group(1)), m.group(2)
    if not suffix:
        return number
    if unit is None:
        raise ConfigError(f"unexpected unit {suffix!r}")
    if unit == "B" and suffix in ("KiB", "MiB"):
        return number * (1024 if suffix == "KiB" else 1024 * 1024)
    if suffix == unit:
        return number
    if suffix.endswith(unit) and suffix[: -len(unit)] in _PREFIX:
        return number * _PREFIX[suffix[: -len(unit)]]
    raise ConfigError(f"unit {suffix!r} does not match expected {unit!r}")


def parse_config(text: str, base: DeviceConfig | None = None) -> DeviceConfig:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _UNITS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            q = parse_quantity(val, _UNITS[key])
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
        if key in _INT_KEYS:
            if q != int(q):
                raise ConfigError(f"line {lineno}: {key} must be an integer")
            q = int(q)
        values[key] = q
    base = base or DeviceConfig()
    return dataclasses.replace(base, **values)


def format_config(cfg: DeviceConfig) -> str:
    lines = []
    for f in dataclasses.fields(cfg):
        v = getattr(cfg, f.name)
        if v is None:
            continue
        unit = _UNITS[f.name]
        suffix = "" if unit in (None, "B") else " " + unit
        lines.append(f"{f.name} = {v!r}{suffix}")
    return "\n".join(lines) + "\n"


def default_config() -> DeviceConfig:
    text = resources.files("lifelogsim.data").joinpath("default.cfg").read_text()
    return parse_config(text)
