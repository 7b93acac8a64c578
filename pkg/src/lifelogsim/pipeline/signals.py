"""From a record log to labelled, fixed-length windows.

``preprocess`` trims each session's warm-up and derives the sampling-rate
channel, ``resample_linear`` puts a stream on a uniform grid, and
``make_windows`` cuts 124-sample windows with 50 % overlap and assigns each
the majority ground-truth labels.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..recorder import RecordLog

CHANNELS = ("sc1", "sc2", "piezo", "sr")
TRIM_S = 30.0
FS = 100.0
WINDOW = 124
STEP = 62


@dataclass
class SessionStream:
    """Irregularly sampled channels of one session, times in seconds."""

    session: int
    power_on_s: float
    t: np.ndarray
    channels: dict  # name -> values, same length as t

    def __len__(self):
        return len(self.t)


def preprocess(log: RecordLog, trim_s: float = TRIM_S) -> list:
    """Drop the first ``trim_s`` seconds of every session and add the
    sampling-rate channel ``sr`` (Hz).

    Voltages are converted to volts.  Sessions left with fewer than two
    samples are skipped with a warning.
    """
    if log.n_samples == 0:
        raise ValueError("record log is empty")
    out = []
    for i, sess in enumerate(log.sessions):
        t_ms = np.array([s.t_ms for s in sess.samples], dtype=np.int64)
        keep = t_ms >= sess.power_on_t_ms + int(round(trim_s * 1000))
        if keep.sum() < 2:
            warnings.warn(f"session {i}: fewer than 2 samples after trimming, skipped", stacklevel=2)
            continue
        kept = [s for s, k in zip(sess.samples, keep) if k]
        t_ms = t_ms[keep]
        gaps = np.diff(t_ms)
        if np.any(gaps <= 0):
            raise ValueError(f"session {i}: duplicate or decreasing timestamps")
        rate = 1000.0 / gaps
        rate = np.concatenate([rate[:1], rate])
        out.append(
            SessionStream(
                i,
                sess.power_on_t_ms / 1000.0,
                t_ms / 1000.0,
                {
                    "sc1": np.array([s.sc1_mv for s in kept]) / 1000.0,
                    "sc2": np.array([s.sc2_mv for s in kept]) / 1000.0,
                    "piezo": np.array([s.piezo_mv for s in kept]) / 1000.0,
                    "sr": rate,
                },
            )
        )
    return out


def uniform_grid(t_first: float, t_last: float, fs: float = FS) -> np.ndarray:
    n = int(np.floor((t_last - t_first) * fs + 1e-9)) + 1
    return t_first + np.arange(n) / fs


def resample_linear(t, x, fs: float = FS):
    """Linear interpolation onto ``t[0] + n/fs`` for all grid points up to
    ``t[-1]``.  Returns ``(grid, values)``."""
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if t.shape != x.shape or t.ndim != 1:
        raise ValueError("t and x must be 1-D and the same length")
    if len(t) < 2:
        raise ValueError("need at least two points")
    if np.any(np.diff(t) <= 0):
        raise ValueError("timestamps must be strictly increasing (duplicates found)")
    grid = uniform_grid(t[0], t[-1], fs)
    return grid, np.interp(grid, t, x)


def n_windows(n_samples: int, window: int = WINDOW, step: int = STEP) -> int:
    return 0 if n_samples < window else (n_samples - window) // step + 1


# ground truth -------------------------------------------------------------

TRUTH_HEADER = "start_s,end_s,place,activity"


def read_truth(text: str) -> list:
    rows = []
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != TRUTH_HEADER:
        raise ValueError(f"truth file must start with {TRUTH_HEADER!r}")
    for n, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != 4:
            raise ValueError(f"truth row {n}: expected 4 fields")
        try:
            a, b = float(parts[0]), float(parts[1])
        except ValueError:
            raise ValueError(f"truth row {n}: bad time") from None
        if not b > a:
            raise ValueError(f"truth row {n}: end must exceed start")
        rows.append((a, b, parts[2], parts[3]))
    return rows


def write_truth(intervals, offset_s: float = 0.0) -> str:
    lines = [TRUTH_HEADER]
    lines += [f"{a + offset_s:.3f},{b + offset_s:.3f},{p},{q}" for a, b, p, q in intervals]
    return "\n".join(lines) + "\n"


def label_at(intervals, t):
    """Place and activity label arrays for times ``t``; '' where uncovered."""
    t = np.asarray(t, dtype=float)
    starts = np.array([iv[0] for iv in intervals])
    ends = np.array([iv[1] for iv in intervals])
    order = np.argsort(starts, kind="stable")
    starts, ends = starts[order], ends[order]
    places = np.array([intervals[i][2] for i in order] + [""], dtype=object)
    acts = np.array([intervals[i][3] for i in order] + [""], dtype=object)
    j = np.searchsorted(starts, t, side="right") - 1
    inside = (j >= 0) & (t < ends[np.clip(j, 0, None)])
    j = np.where(inside, j, len(starts))
    return places[j], acts[j]


def majority_label(labels) -> str:
    """Most common label; ties go to the tied label seen last."""
    counts = Counter(labels)
    best = max(counts.values())
    for lab in reversed(labels):
        if counts[lab] == best:
            return lab
    raise ValueError("empty label sequence")


@dataclass
class WindowSet:
    """All windows of one log.  Arrays are aligned along the first axis."""

    session: np.ndarray
    start_s: np.ndarray
    place: np.ndarray
    activity: np.ndarray
    data: dict  # channel -> (n, WINDOW)

    def __len__(self):
        return len(self.start_s)


def make_windows(streams, intervals=None, channels=CHANNELS, fs=FS, window=WINDOW, step=STEP) -> WindowSet:
    """Resample each session and cut overlapping windows.

    Windows whose majority label is uncovered by ``intervals`` are dropped.
    Without ``intervals`` every window is kept with empty labels.
    """
    sess, start, place, act = [], [], [], []
    data = {c: [] for c in channels}
    for st in streams:
        grid = None
        series = {}
        for c in channels:
            grid, series[c] = resample_linear(st.t, st.channels[c], fs)
        n_win = n_windows(len(grid), window, step)
        if n_win == 0:
            continue
        idx = np.arange(n_win)[:, None] * step + np.arange(window)
        if intervals is not None:
            pl, ac = label_at(intervals, grid)
        for w in range(n_win):
            if intervals is not None:
                p = majority_label(list(pl[idx[w]]))
                a = majority_label(list(ac[idx[w]]))
                if p == "" or a == "":
                    continue
            else:
                p = a = ""
            sess.append(st.session)
            start.append(grid[idx[w, 0]])
            place.append(p)
            act.append(a)
            for c in channels:
                data[c].append(series[c][idx[w]])
    return WindowSet(
        np.array(sess, dtype=np.int64),
        np.array(start, dtype=float),
        np.array(place, dtype=object),
        np.array(act, dtype=object),
        {c: np.array(v).reshape(-1, window) for c, v in data.items()},
    )
