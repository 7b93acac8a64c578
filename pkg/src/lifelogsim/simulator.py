"""Fixed-step simulation of the logger over a scenario.

``run`` drives the compiled loop and turns its raw event indices into a
``RecordLog`` and a ``PowerTrace``.  ``iter_steps`` is the same simulation
written against ``scheduler.device_step``; it is slow and exists for
inspection and cross-checking.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import _kernel
from .config import DeviceConfig
from .electrical import harvest_current
from .environment import AmbientNoise, Scenario, ambient_arrays, ambient_at
from .recorder import CapacityError, RecordLog, Sample, to_mv
from .scheduler import McuMode, PowerSource, baseline_step, device_step, initial_state


class Mode(enum.Enum):
    PROPOSED = "proposed"
    BASELINE = "baseline"


class TraceFormatError(ValueError):
    pass


TRACE_HEADER = "t_s,power_source,mcu_mode,v_cap"


@dataclass
class PowerTrace:
    """State snapshots every ``trace_interval``; entry i covers [t_i, t_{i+1})."""

    t: np.ndarray
    on_capacitor: np.ndarray  # bool
    active: np.ndarray  # bool
    v_cap: np.ndarray

    def __post_init__(self):
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise TraceFormatError("trace times must be strictly increasing")

    def __len__(self):
        return len(self.t)

    @property
    def entries(self):
        for t, c, a, v in zip(self.t, self.on_capacitor, self.active, self.v_cap):
            yield (
                float(t),
                PowerSource.CAPACITOR if c else PowerSource.BATTERY,
                McuMode.ACTIVE if a else McuMode.SLEEP,
                float(v),
            )

    def to_csv(self) -> str:
        src = np.where(self.on_capacitor, "capacitor", "battery")
        md = np.where(self.active, "active", "sleep")
        lines = [TRACE_HEADER]
        lines += [f"{t:.3f},{s},{m},{v:.6f}" for t, s, m, v in zip(self.t, src, md, self.v_cap)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "PowerTrace":
        rows = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not rows or rows[0] != TRACE_HEADER:
            raise TraceFormatError(f"expected header {TRACE_HEADER!r}")
        t, c, a, v = [], [], [], []
        for n, row in enumerate(rows[1:], start=2):
            parts = row.split(",")
            if len(parts) != 4 or parts[1] not in ("capacitor", "battery") or parts[2] not in ("sleep", "active"):
                raise TraceFormatError(f"row {n}: malformed trace entry {row!r}")
            try:
                t.append(float(parts[0]))
                v.append(float(parts[3]))
            except ValueError:
                raise TraceFormatError(f"row {n}: non-numeric field") from None
            c.append(parts[1] == "capacitor")
            a.append(parts[2] == "active")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise TraceFormatError("trace times must be strictly increasing")
        return cls(np.array(t), np.array(c, bool), np.array(a, bool), np.array(v))


@dataclass(frozen=True)
class ZeroEnergyReport:
    zero_energy_time: float
    battery_time: float
    zero_energy_rate: float

    @property
    def total_time(self):
        return self.zero_energy_time + self.battery_time

    def summary(self) -> str:
        return (
            f"zero-energy time: {self.zero_energy_time:.4g} s\n"
            f"battery time:     {self.battery_time:.4g} s\n"
            f"zero-energy rate: {self.zero_energy_rate:.4f}"
        )


def zero_energy_rate(tr: PowerTrace) -> ZeroEnergyReport:
    """Time on the capacitor rail over total traced time.

    Each entry holds until the next one; the last entry is given the
    preceding spacing.  A single entry counts as an instant (rate 1 or 0).
    """
    if len(tr) == 0:
        raise ValueError("empty power trace")
    if len(tr) == 1:
        return ZeroEnergyReport(0.0, 0.0, 1.0 if tr.on_capacitor[0] else 0.0)
    d = np.diff(tr.t)
    d = np.append(d, d[-1])
    cap = float(np.sum(d[tr.on_capacitor]))
    batt = float(np.sum(d[~tr.on_capacitor]))
    return ZeroEnergyReport(cap, batt, cap / (cap + batt))


@dataclass
class SimResult:
    log: RecordLog
    trace: PowerTrace
    record_t: np.ndarray  # event times, s
    duration: float
    battery_time: float
    charge: float  # integral of net capacitor current, C
    v_initial: float
    v_final: float
    clamped_steps: int
    switch_t: np.ndarray
    switch_to_capacitor: np.ndarray

    def __iter__(self):
        # allows ``log, trace = run(...)``
        yield self.log
        yield self.trace

    @property
    def n_records(self) -> int:
        return len(self.record_t)

    @property
    def mean_rate_hz(self) -> float:
        return self.n_records / self.duration


def _noise_for(sc: Scenario, cfg: DeviceConfig, noise):
    if noise is not None:
        return noise
    seed = sc.seed if cfg.seed is None else cfg.seed
    return AmbientNoise(seed, sc.duration)


def sensed_voltages(sc: Scenario, cfg: DeviceConfig, t, noise: AmbientNoise):
    """(sc1, sc2, |piezo|) volts at times ``t``."""
    lux, accel, _ = ambient_arrays(sc, t, noise)
    out = []
    for cell in (cfg.sc1, cfg.sc2):
        v = cell.voc_max * np.log1p(lux / cell.l_knee) / math.log1p(cfg.l_ref / cell.l_knee)
        out.append(np.clip(v, 0.0, cell.voc_max))
    out.append(np.abs(cfg.piezo_sensitivity * accel))
    return tuple(out)


def run(sc: Scenario, cfg: DeviceConfig, mode: Mode = Mode.PROPOSED, noise: AmbientNoise | None = None) -> SimResult:
    mode = Mode(mode)
    noise = _noise_for(sc, cfg, noise)
    n_steps = int(round(sc.duration / cfg.dt))
    if n_steps < 1:
        raise ValueError("scenario shorter than one step")
    s0 = initial_state(cfg.v_cap_init, cfg.power_v_fall, cfg.power_v_rise, cfg.mode_offset, cfg.cap, mode is Mode.BASELINE)
    out = _kernel.simulate(
        sc.profile_arrays(), noise.lux, noise.block, cfg,
        (s0.cmp_power.v_fall, s0.cmp_power.v_rise, s0.cmp_mode.v_fall, s0.cmp_mode.v_rise),
        float(cfg.v_cap_init), int(s0.power_source is PowerSource.CAPACITOR),
        int(s0.cmp_power.output), int(s0.cmp_mode.output), n_steps, mode is Mode.BASELINE,
    )  # fmt: skip
    rec_k, sw_k, sw_kind = out["rec_k"], out["sw_k"], out["sw_kind"]
    tr_src, tr_mode, tr_v = out["tr_src"], out["tr_mode"], out["tr_v"]
    v_end, batt, charge, clamped = out["v"], out["batt"], out["charge"], out["clamped"]

    trace = PowerTrace(
        np.arange(len(tr_v)) * cfg.trace_interval, tr_src.astype(bool), tr_mode.astype(bool), tr_v
    )
    record_t = (rec_k + 1) * cfg.dt
    log = _build_log(sc, cfg, noise, rec_k, sw_k, sw_kind, s0.power_source is PowerSource.BATTERY)
    return SimResult(
        log, trace, record_t, n_steps * cfg.dt, float(batt), float(charge), float(cfg.v_cap_init), float(v_end),
        int(clamped), (sw_k + 1) * cfg.dt, sw_kind.astype(bool),
    )  # fmt: skip


def _build_log(sc, cfg, noise, rec_k, sw_k, sw_kind, starts_on_battery):
    log = RecordLog(cfg.capacity_bytes)
    if len(rec_k) == 0:
        return log
    # nothing past this many records can fit, so skip sensing them
    n_fit = min(len(rec_k), cfg.capacity_bytes // 10 + 1)
    sc1, sc2, pz = sensed_voltages(sc, cfg, rec_k[:n_fit] * cfg.dt, noise)
    to_ms = lambda k: cfg.rtc_start_ms + int(round((k + 1) * cfg.dt * 1000.0))  # noqa: E731

    # merge by step; within a step: switch-to-capacitor, record, switch-to-battery
    events = [(int(k), 0 if kind else 2, i) for i, (k, kind) in enumerate(zip(sw_k, sw_kind))]
    events += [(int(k), 1, i) for i, k in enumerate(rec_k)]
    events.sort()

    battery_since = cfg.rtc_start_ms if starts_on_battery else None
    power_on = cfg.rtc_start_ms
    pending = True
    gap_ms = cfg.session_gap * 1000.0
    for k, kind, i in events:
        t_ms = to_ms(k)
        if kind == 2:
            battery_since = t_ms
        elif kind == 0:
            if battery_since is not None and t_ms - battery_since >= gap_ms:
                power_on, pending = t_ms, True
            battery_since = None
        else:
            if i >= n_fit:
                log.dropped = len(rec_k) - i
                break
            if pending:
                log.begin_session(power_on)
                pending = False
            sample = Sample(t_ms, to_mv(sc1[i]), to_mv(sc2[i]), to_mv(pz[i]))
            try:
                log.append(sample)
            except CapacityError:
                # the log only grows, so every later record is dropped too
                log.dropped = len(rec_k) - i
                break
    return log


def iter_steps(sc: Scenario, cfg: DeviceConfig, mode: Mode = Mode.PROPOSED, noise: AmbientNoise | None = None):
    """Reference stepping through ``device_step``/``baseline_step``.

    Yields ``(k, state_after, events, harvest)`` for every step k.
    """
    mode = Mode(mode)
    noise = _noise_for(sc, cfg, noise)
    step = baseline_step if mode is Mode.BASELINE else device_step
    s = initial_state(cfg.v_cap_init, cfg.power_v_fall, cfg.power_v_rise, cfg.mode_offset, cfg.cap, mode is Mode.BASELINE)
    sc1, sc2, budget = cfg.sc1, cfg.sc2, cfg.budget
    n_steps = int(round(sc.duration / cfg.dt))
    for k in range(n_steps):
        lux = ambient_at(sc, k * cfg.dt, noise)[0]
        h = harvest_current(sc1, lux) + harvest_current(sc2, lux)
        s, ev = step(s, h, cfg.dt, budget)
        yield k, s, ev, h


def calibrate(
    cfg: DeviceConfig,
    target_hz: float = 2.15,
    lux: float = 500.0,
    duration: float = 60.0,
    lo: float = 500.0,
    hi: float = 50000.0,
    iters: int = 40,
) -> DeviceConfig:
    """Return ``cfg`` with both cells' saturation illuminance set so that a
    cold-start run under constant ``lux`` averages ``target_hz`` records/s.

    Only the light-to-current scale is solved for: the recharge time between
    records dominates the cycle, so the rail draws barely move the rate.
    """
    from .environment import constant_scenario

    sc = constant_scenario(lux, duration, seed=0)
    target = target_hz * duration

    def count(l_sat):
        return run(sc, cfg.replace(sc1_l_sat=l_sat, sc2_l_sat=l_sat)).n_records

    if not count(lo) >= target >= count(hi):
        raise ValueError("target rate not bracketed by the l_sat search range")
    # record count falls as l_sat grows; find the band where it rounds to target
    a, b = lo, hi
    for _ in range(iters):
        m = 0.5 * (a + b)
        if count(m) > target:
            a = m
        else:
            b = m
    upper = b
    a, b = lo, hi
    for _ in range(iters):
        m = 0.5 * (a + b)
        if count(m) >= target:
            a = m
        else:
            b = m
    l_sat = 0.5 * (upper + a)
    return cfg.replace(sc1_l_sat=l_sat, sc2_l_sat=l_sat)
