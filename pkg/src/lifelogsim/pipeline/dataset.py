"""Feature tables: building them from logs or simulated wearers, and their
CSV form.

CSV layout::

    # channels=sc1,sc2,piezo,sr features=mean,std,...; f_i is channel i//20, feature i%20
    user,session,window_start_s,place,activity,f_0,...,f_79
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import DeviceConfig
from ..environment import Scenario, jitter_scenario
from ..recorder import RecordLog
from ..simulator import Mode, run
from .features import FEATURE_NAMES, N_FEATURES, extract_features
from .signals import CHANNELS, make_windows, preprocess

_FIXED = ["user", "session", "window_start_s", "place", "activity"]


class FeatureFormatError(ValueError):
    pass


@dataclass
class FeatureTable:
    user: np.ndarray
    session: np.ndarray
    start_s: np.ndarray
    place: np.ndarray
    activity: np.ndarray
    X: np.ndarray
    channels: tuple

    def __len__(self):
        return len(self.X)

    @property
    def order(self):
        """Temporal sort key within a user."""
        return np.lexsort((self.start_s, self.session))

    def time_rank(self):
        rank = np.empty(len(self), dtype=np.int64)
        rank[self.order] = np.arange(len(self))
        return rank

    @classmethod
    def concat(cls, tables):
        tables = list(tables)
        if not tables:
            raise ValueError("nothing to concatenate")
        ch = tables[0].channels
        if any(t.channels != ch for t in tables):
            raise ValueError("tables use different channel sets")
        cat = lambda name: np.concatenate([getattr(t, name) for t in tables])  # noqa: E731
        return cls(cat("user"), cat("session"), cat("start_s"), cat("place"), cat("activity"), cat("X"), ch)


def check_channels(channels) -> tuple:
    channels = tuple(channels)
    bad = [c for c in channels if c not in CHANNELS]
    if bad or not channels:
        raise ValueError(f"unknown channel(s) {', '.join(bad) or '(none)'}; valid: {', '.join(CHANNELS)}")
    return channels


def features_from_log(log: RecordLog, intervals, channels=CHANNELS, user=0) -> FeatureTable:
    """Windows and features of every session; an empty log gives an empty table."""
    channels = check_channels(channels)
    streams = preprocess(log) if log.n_samples else []
    ws = make_windows(streams, intervals, channels)
    X = extract_features(ws.data, channels) if len(ws) else np.empty((0, N_FEATURES * len(channels)))
    return FeatureTable(np.full(len(ws), user), ws.session, ws.start_s, ws.place, ws.activity, X, channels)


def simulate_users(
    scenario: Scenario,
    cfg: DeviceConfig,
    n_users: int = 6,
    seed: int = 0,
    channels=CHANNELS,
    mode: Mode = Mode.PROPOSED,
) -> FeatureTable:
    """Simulate ``n_users`` wearers of one scenario and pool their features.

    Each wearer gets an independent noise seed and a light/vibration gain
    drawn by ``jitter_scenario``.  Log capacity is lifted so the whole run
    is kept.
    """
    tables = []
    for u in range(n_users):
        rng = np.random.default_rng([seed, u])
        sc = jitter_scenario(scenario, rng)
        ucfg = cfg.replace(seed=int(rng.integers(2**31)), capacity_bytes=max(cfg.capacity_bytes, 1 << 24))
        res = run(sc, ucfg, mode)
        offset = ucfg.rtc_start_ms / 1000.0
        intervals = [(a + offset, b + offset, p, q) for a, b, p, q in sc.truth_intervals()]
        tables.append(features_from_log(res.log, intervals, channels, user=u))
    return FeatureTable.concat(tables)


def write_features(table: FeatureTable) -> str:
    k = table.X.shape[1]
    lines = [
        f"# channels={','.join(table.channels)} features={','.join(FEATURE_NAMES)};"
        f" f_i is channel i//{N_FEATURES}, feature i%{N_FEATURES}",
        ",".join(_FIXED + [f"f_{i}" for i in range(k)]),
    ]
    for i in range(len(table)):
        vals = ",".join(repr(float(v)) for v in table.X[i])
        lines.append(
            f"{int(table.user[i])},{int(table.session[i])},{float(table.start_s[i])!r},{table.place[i]},{table.activity[i]},{vals}"
        )
    return "\n".join(lines) + "\n"


def read_features(text: str) -> FeatureTable:
    channels = None
    header = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            for tok in line[1:].replace(";", " ").split():
                if tok.startswith("channels="):
                    channels = tuple(tok.split("=", 1)[1].split(","))
            continue
        if header is None:
            header = line.split(",")
            if header[:5] != _FIXED:
                raise FeatureFormatError(f"row {lineno}: header must start with {','.join(_FIXED)}")
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise FeatureFormatError(f"row {lineno}: expected {len(header)} fields, got {len(parts)}")
        try:
            rows.append((int(parts[0]), int(parts[1]), float(parts[2]), parts[3], parts[4], [float(v) for v in parts[5:]]))
        except ValueError:
            raise FeatureFormatError(f"row {lineno}: non-numeric field") from None
    if header is None:
        raise FeatureFormatError("missing header")
    k = len(header) - len(_FIXED)
    if channels is None:
        channels = tuple(f"ch{i}" for i in range(k // N_FEATURES))
    cols = list(zip(*rows)) if rows else [[]] * 6
    return FeatureTable(
        np.array(cols[0], dtype=np.int64),
        np.array(cols[1], dtype=np.int64),
        np.array(cols[2], dtype=float),
        np.array(cols[3], dtype=object),
        np.array(cols[4], dtype=object),
        np.array(cols[5], dtype=float).reshape(len(rows), k),
        channels,
    )
