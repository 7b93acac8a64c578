"""Scenario files and ambient playback.

A scenario is a timeline of (place, activity, duration) segments plus the
light and motion profiles they refer to.  Playback turns simulated time into
illuminance, acceleration and the ground-truth labels.

File format (``#`` starts a comment, fields are whitespace separated)::

    [places]
    # name  lux_mean lux_std flicker_amp flicker_hz
    lab1    520      25      8           0.7
    [activities]
    # name  class   vib_amp vib_hz shadow_depth shadow_hz
    sitting static  0.02    0.3    0.0          0.0
    [timeline]
    # place activity duration_s
    lab1    sitting  300
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources

import numpy as np

STATIC_VIB_LIMIT = 0.05  # g
NOISE_BLOCK_S = 0.1
ACCEL_NOISE_G = 0.01

_LABEL = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class PlaceProfile:
    name: str
    lux_mean: float
    lux_std: float = 0.0
    flicker_amp: float = 0.0
    flicker_hz: float = 0.0

    def __post_init__(self):
        if self.lux_mean < 0 or self.lux_std < 0 or self.flicker_amp < 0 or self.flicker_hz < 0:
            raise ScenarioError(f"place {self.name!r}: negative light parameter")


@dataclass(frozen=True)
class ActivityProfile:
    name: str
    dynamic: bool
    vib_amp: float = 0.0
    vib_hz: float = 0.0
    shadow_depth: float = 0.0
    shadow_hz: float = 0.0

    def __post_init__(self):
        if self.vib_amp < 0 or self.vib_hz < 0 or self.shadow_hz < 0:
            raise ScenarioError(f"activity {self.name!r}: negative motion parameter")
        if not 0 <= self.shadow_depth < 1:
            raise ScenarioError(f"activity {self.name!r}: shadow_depth must be in [0, 1)")
        if not self.dynamic and self.vib_amp > STATIC_VIB_LIMIT:
            raise ScenarioError(f"static activity {self.name!r} has vib_amp > {STATIC_VIB_LIMIT} g")


@dataclass(frozen=True)
class Segment:
    place: str
    activity: str
    duration: float


@dataclass(frozen=True)
class Scenario:
    segments: tuple
    places: dict = field(hash=False)
    activities: dict = field(hash=False)
    seed: int = 0

    def __post_init__(self):
        if not self.segments:
            raise ScenarioError("scenario has no timeline segments")
        for seg in self.segments:
            if seg.place not in self.places:
                raise ScenarioError(f"unknown place {seg.place!r}")
            if seg.activity not in self.activities:
                raise ScenarioError(f"unknown activity {seg.activity!r}")
            if not seg.duration > 0:
                raise ScenarioError("segment durations must be > 0")

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def boundaries(self) -> np.ndarray:
        """Segment end times, shape (n_segments,)."""
        return np.cumsum([s.duration for s in self.segments], dtype=float)

    def segment_index(self, t):
        """Index of the segment containing ``t`` (half-open intervals)."""
        return np.searchsorted(self.boundaries, t, side="right")

    def profile_arrays(self):
        """Per-segment parameter columns, in playback order."""
        P = [self.places[s.place] for s in self.segments]
        A = [self.activities[s.activity] for s in self.segments]
        f = lambda xs: np.array(xs, dtype=float)  # noqa: E731
        return {
            "end": self.boundaries,
            "lux_mean": f([p.lux_mean for p in P]),
            "lux_std": f([p.lux_std for p in P]),
            "flicker_amp": f([p.flicker_amp for p in P]),
            "flicker_hz": f([p.flicker_hz for p in P]),
            "vib_amp": f([a.vib_amp for a in A]),
            "vib_hz": f([a.vib_hz for a in A]),
            "shadow_depth": f([a.shadow_depth for a in A]),
            "shadow_hz": f([a.shadow_hz for a in A]),
        }

    def truth_intervals(self):
        """``(start_s, end_s, place, activity)`` for each segment."""
        out, t0 = [], 0.0
        for seg, t1 in zip(self.segments, self.boundaries):
            out.append((t0, float(t1), seg.place, seg.activity))
            t0 = float(t1)
        return out


def _floats(fields, n, lineno, what):
    if len(fields) != n:
        raise ScenarioError(f"line {lineno}: {what} needs {n} fields, got {len(fields)}")
    try:
        return [float(x) for x in fields]
    except ValueError as exc:
        raise ScenarioError(f"line {lineno}: {exc}") from None


def parse_scenario(text: str, seed: int = 0) -> Scenario:
    places, activities, timeline = {}, {}, []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            section = line.strip("[]").strip().lower()
            if section not in ("places", "activities", "timeline") or not line.endswith("]"):
                raise ScenarioError(f"line {lineno}: unknown section {line!r}")
            continue
        parts = line.split()
        if section is None:
            raise ScenarioError(f"line {lineno}: data before any section header")
        name = parts[0]
        if not _LABEL.match(name):
            raise ScenarioError(f"line {lineno}: bad label {name!r}")
        try:
            if section == "places":
                vals = _floats(parts[1:], 4, lineno, "place")
                places[name] = PlaceProfile(name, *vals)
            elif section == "activities":
                if len(parts) < 2:
                    raise ScenarioError(f"line {lineno}: activity needs a class")
                cls = parts[1].lower()
                if cls not in ("static", "dynamic"):
                    raise ScenarioError(f"line {lineno}: class must be static or dynamic, got {parts[1]!r}")
                vals = _floats(parts[2:], 4, lineno, "activity")
                activities[name] = ActivityProfile(name, cls == "dynamic", *vals)
            else:
                if len(parts) != 3:
                    raise ScenarioError(f"line {lineno}: timeline needs place activity duration_s")
                dur = _floats(parts[2:], 1, lineno, "timeline")[0]
                if not dur > 0:
                    raise ScenarioError(f"line {lineno}: non-positive duration {dur}")
                timeline.append((lineno, Segment(parts[0], parts[1], dur)))
        except ScenarioError as exc:
            msg = str(exc)
            raise ScenarioError(msg if msg.startswith("line ") else f"line {lineno}: {msg}") from None

    for lineno, seg in timeline:
        if seg.place not in places:
            raise ScenarioError(f"line {lineno}: unknown place {seg.place!r}")
        if seg.activity not in activities:
            raise ScenarioError(f"line {lineno}: unknown activity {seg.activity!r}")
    return Scenario(tuple(s for _, s in timeline), places, activities, seed)


def format_scenario(sc: Scenario) -> str:
    lines = ["[places]"]
    for p in sc.places.values():
        lines.append(f"{p.name} {p.lux_mean!r} {p.lux_std!r} {p.flicker_amp!r} {p.flicker_hz!r}")
    lines.append("[activities]")
    for a in sc.activities.values():
        cls = "dynamic" if a.dynamic else "static"
        lines.append(f"{a.name} {cls} {a.vib_amp!r} {a.vib_hz!r} {a.shadow_depth!r} {a.shadow_hz!r}")
    lines.append("[timeline]")
    for s in sc.segments:
        lines.append(f"{s.place} {s.activity} {s.duration!r}")
    return "\n".join(lines) + "\n"


def load_bundled(name: str, seed: int = 0) -> Scenario:
    """Load one of the packaged scenarios: ``"default"`` (14 places, 5
    activities) or ``"office_9h"``."""
    text = resources.files("lifelogsim.data").joinpath(f"{name}.scenario").read_text()
    return parse_scenario(text, seed=seed)


def constant_scenario(lux: float, duration: float, activity: str = "sitting", seed: int = 0) -> Scenario:
    """Single-segment scenario with noise-free constant light and no motion."""
    place = PlaceProfile("fixed", float(lux))
    act = ActivityProfile(activity, False)
    return Scenario((Segment("fixed", activity, float(duration)),), {"fixed": place}, {activity: act}, seed)


def jitter_scenario(
    sc: Scenario,
    rng: np.random.Generator,
    lux_gain_sd: float = 0.12,
    place_gain_sd: float = 0.15,
    vib_gain_sd: float = 0.1,
    tempo_sd: float = 0.08,
) -> Scenario:
    """Per-wearer variation.

    Light: one overall gain (body height, tag angle) times an independent
    gain per place (where this wearer tends to stand or sit).  Motion: one
    vibration gain and one gait tempo factor for all activities.
    """
    clip = lambda x: float(np.clip(x, 0.5, 1.5))  # noqa: E731
    g = clip(rng.normal(1.0, lux_gain_sd))
    places = {}
    for k, p in sc.places.items():
        gp = g * clip(rng.normal(1.0, place_gain_sd))
        places[k] = replace(p, lux_mean=p.lux_mean * gp, lux_std=p.lux_std * gp, flicker_amp=p.flicker_amp * gp)
    v = clip(rng.normal(1.0, vib_gain_sd))
    tempo = clip(rng.normal(1.0, tempo_sd))
    acts = {}
    for k, a in sc.activities.items():
        amp = a.vib_amp * v
        if not a.dynamic:
            amp = min(amp, STATIC_VIB_LIMIT)
        acts[k] = replace(a, vib_amp=amp, vib_hz=a.vib_hz * tempo, shadow_hz=a.shadow_hz * tempo)
    return replace(sc, places=places, activities=acts)


class AmbientNoise:
    """Seeded noise stream for playback.

    Light noise and accelerometer noise are held constant over blocks of
    ``block`` seconds, so any time can be looked up without replaying the
    generator.  Accelerometer noise is truncated at five sigma.
    """

    def __init__(self, seed, duration, block=NOISE_BLOCK_S, accel_sigma=ACCEL_NOISE_G):
        if not block > 0:
            raise ValueError("noise block must be > 0")
        self.block = float(block)
        self.accel_sigma = float(accel_sigma)
        n = int(math.ceil(duration / block)) + 2
        rng = np.random.default_rng(seed)
        self.lux = rng.standard_normal(n)
        self.accel = np.clip(rng.standard_normal(n), -5.0, 5.0)

    def block_index(self, t):
        return np.floor(np.asarray(t) / self.block + 1e-9).astype(np.int64)


def _square01(hz, t):
    return 1.0 if (hz * t) % 1.0 < 0.5 else 0.0


def ambient_at(sc: Scenario, t: float, noise: AmbientNoise):
    """``(lux, accel_g, place, activity)`` at time ``t``."""
    if not 0 <= t < sc.duration:
        raise ValueError(f"t={t} outside scenario [0, {sc.duration})")
    seg = sc.segments[int(sc.segment_index(t))]
    p, a = sc.places[seg.place], sc.activities[seg.activity]
    b = int(math.floor(t / noise.block + 1e-9))
    base = p.lux_mean + p.lux_std * noise.lux[b] + p.flicker_amp * math.sin(2.0 * math.pi * p.flicker_hz * t)
    shade = 1.0 - a.shadow_depth * _square01(a.shadow_hz, t)
    lux = max(0.0, base) * shade
    accel = a.vib_amp * math.sin(2.0 * math.pi * a.vib_hz * t) + noise.accel_sigma * noise.accel[b]
    return lux, accel, seg.place, seg.activity


def ambient_arrays(sc: Scenario, t, noise: AmbientNoise):
    """Vectorised ``ambient_at`` for the numeric part: returns (lux, accel, segment_index)."""
    t = np.asarray(t, dtype=float)
    if t.size and (t.min() < 0 or t.max() >= sc.duration):
        raise ValueError("times outside scenario")
    cols = sc.profile_arrays()
    i = sc.segment_index(t)
    b = noise.block_index(t)
    base = cols["lux_mean"][i] + cols["lux_std"][i] * noise.lux[b] + cols["flicker_amp"][i] * np.sin(
        2.0 * np.pi * cols["flicker_hz"][i] * t
    )
    sq = (np.mod(cols["shadow_hz"][i] * t, 1.0) < 0.5).astype(float)
    lux = np.maximum(0.0, base) * (1.0 - cols["shadow_depth"][i] * sq)
    accel = cols["vib_amp"][i] * np.sin(2.0 * np.pi * cols["vib_hz"][i] * t) + noise.accel_sigma * noise.accel[b]
    return lux, accel, i
