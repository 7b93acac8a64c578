"""Per-window feature extraction.

Every function here works on a 2-D array of windows, shape
``(n_windows, window_len)``, so a whole session is processed with a handful
of numpy calls.  ``channel_features`` returns the 20 columns below for one
channel; ``extract_features`` concatenates selected channels.
"""

from __future__ import annotations

import numpy as np

FS = 100.0
BAND_LIMIT_HZ = 5.0
ENTROPY_BINS = 10
AR_ORDER = 4

FEATURE_NAMES = (
    "mean", "std", "mad", "max", "min", "sum_sq", "entropy", "iqr",
    "burg_a1", "burg_a2", "burg_a3", "burg_a4",
    "range", "rms", "spec_skew", "spec_kurt", "max_freq_hz",
    "spec_centroid_hz", "band_energy_frac", "mean_psd",
)  # fmt: skip
N_FEATURES = len(FEATURE_NAMES)

# relative size below which a Burg stage's error energy counts as exhausted
_BURG_TINY = 1e-24
# spectral variance below this fraction of the squared mean counts as flat
_FLAT = 1e-24


def burg_ar(x, order: int = AR_ORDER, return_reflection: bool = False):
    """AR coefficients by Burg's method.

    Model: ``x[n] = -sum_k a[k] x[n-k] + e[n]``.  ``x`` may be 1-D or a stack
    of rows.  Constant rows give all-zero coefficients, and so does any stage
    whose forward+backward error energy has collapsed to round-off (the
    remaining higher-order coefficients stay 0).
    """
    x = np.asarray(x, dtype=float)
    one_d = x.ndim == 1
    X = np.atleast_2d(x)
    n_rows, n = X.shape
    if n <= order:
        raise ValueError(f"need more than {order} samples, got {n}")
    a = np.zeros((n_rows, order))
    refl = np.zeros((n_rows, order))
    live = np.ptp(X, axis=1) > 0

    f = X[:, 1:].copy()
    b = X[:, :-1].copy()
    den0 = None
    for m in range(order):
        num = -2.0 * np.einsum("ij,ij->i", f, b)
        den = np.einsum("ij,ij->i", f, f) + np.einsum("ij,ij->i", b, b)
        if den0 is None:
            den0 = den.copy()
        live &= den > _BURG_TINY * den0
        k = np.where(live, num / np.where(live, den, 1.0), 0.0)
        refl[:, m] = k
        # Levinson update of the polynomial
        prev = a[:, :m].copy()
        a[:, :m] = prev + k[:, None] * prev[:, ::-1]
        a[:, m] = k
        f, b = f + k[:, None] * b, b + k[:, None] * f
        f, b = f[:, 1:], b[:, :-1]
    if one_d:
        a, refl = a[0], refl[0]
    return (a, refl) if return_reflection else a


def _entropy(W, lo, hi):
    span = hi - lo
    flat = span == 0
    # (x - lo) * bins / span, in that order, so values on a bin edge land exactly
    idx = np.floor((W - lo[:, None]) * ENTROPY_BINS / np.where(flat, 1.0, span)[:, None]).astype(np.int64)
    np.clip(idx, 0, ENTROPY_BINS - 1, out=idx)
    counts = np.zeros((W.shape[0], ENTROPY_BINS))
    np.add.at(counts, (np.repeat(np.arange(W.shape[0]), W.shape[1]), idx.ravel()), 1.0)
    p = counts / W.shape[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -np.sum(np.where(p > 0, p * np.log(p), 0.0), axis=1)
    h[flat] = 0.0
    return h


def _spectral(W, fs):
    n = W.shape[1]
    mag = np.abs(np.fft.rfft(W, axis=1))[:, 1 : n // 2 + 1]
    freqs = np.arange(1, mag.shape[1] + 1) * fs / n
    power = mag**2

    mu = mag.mean(axis=1, keepdims=True)
    d = mag - mu
    m2 = np.mean(d**2, axis=1)
    m3 = np.mean(d**3, axis=1)
    m4 = np.mean(d**4, axis=1)
    # a spectrum flat to round-off has no shape to describe
    spread = m2 > _FLAT * mu[:, 0] ** 2
    safe = np.where(spread, m2, 1.0)
    skew = np.where(spread, m3 / safe**1.5, 0.0)
    kurt = np.where(spread, m4 / safe**2 - 3.0, 0.0)

    total = mag.sum(axis=1)
    energy = power.sum(axis=1)
    nonzero = energy > 0
    # ties within round-off go to the lowest frequency
    peak = freqs[np.argmax(mag >= mag.max(axis=1, keepdims=True) * (1.0 - 1e-12), axis=1)]
    centroid = np.where(nonzero, (mag @ freqs) / np.where(nonzero, total, 1.0), 0.0)
    band = power[:, freqs <= BAND_LIMIT_HZ].sum(axis=1)
    band_frac = np.where(nonzero, band / np.where(nonzero, energy, 1.0), 0.0)
    mean_psd = power.mean(axis=1) / (fs * n)
    return skew, kurt, np.where(nonzero, peak, 0.0), centroid, band_frac, mean_psd


def channel_features(W, fs: float = FS) -> np.ndarray:
    """20 features for each row of ``W``; returns ``(n_windows, 20)``."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    if not np.all(np.isfinite(W)):
        raise ValueError("window contains non-finite values")
    n = W.shape[1]
    mean = W.mean(axis=1)
    std = W.std(axis=1)
    med = np.median(W, axis=1)
    mad = np.median(np.abs(W - med[:, None]), axis=1)
    hi = W.max(axis=1)
    lo = W.min(axis=1)
    sum_sq = np.einsum("ij,ij->i", W, W)
    q25, q75 = np.percentile(W, [25, 75], axis=1)
    ar = burg_ar(W)
    spectral = _spectral(W, fs)

    out = np.column_stack(
        [mean, std, mad, hi, lo, sum_sq, _entropy(W, lo, hi), q75 - q25, ar, hi - lo, np.sqrt(sum_sq / n), *spectral]
    )
    # constant windows are summarised exactly, whatever summation and rfft round-off say
    flat = hi == lo
    out[flat, 0] = lo[flat]
    out[flat, 1] = 0.0
    out[flat, 13] = np.abs(lo[flat])
    out[flat, 14:] = 0.0
    return out


def extract_features(windows: dict, channels, fs: float = FS) -> np.ndarray:
    """Concatenate ``channel_features`` for ``channels`` in the given order.

    ``windows`` maps channel name to its ``(n_windows, window_len)`` array.
    """
    channels = list(channels)
    if not channels:
        raise ValueError("no channels selected")
    return np.hstack([channel_features(windows[c], fs) for c in channels])


def feature_columns(channels) -> list:
    return [f"{c}.{name}" for c in channels for name in FEATURE_NAMES]
