"""Sliding-window feature extraction for multi-channel time series.

A fixed-length window of raw samples is reduced to a feature vector of
per-channel signal indicators: min, max, population standard deviation, RMS,
and the strongest FFT peaks. Feature order is fixed and documented so that
host code and generated C agree byte-for-byte on layout:

    per channel, in channel order:
        [min, max, std, rms, peak1_bin_norm, peak1_mag, ..., peakP_bin_norm, peakP_mag]

where ``peak_bin_norm`` is the DFT bin index divided by W/2 (in (0, 1]; a
0.0/0.0 pair marks an unused peak slot) and peak magnitudes come from the
unnormalized magnitude spectrum of the rectangular-windowed signal, DC bin
excluded.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, InputError

SCALAR_FEATURES = ("min", "max", "std", "rms")
ALL_FEATURES = SCALAR_FEATURES + ("fft_peaks",)


@dataclass(frozen=True)
class Sample:
    """One timestamped multi-channel sensor reading."""

    t: float
    channels: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(float(v) for v in self.channels))


@dataclass(frozen=True)
class DspConfig:
    """Windowing and feature-set configuration.

    window_len must be a power of two (radix-2 transform); stride must be in
    [1, window_len]. The feature dimension is fixed at construction.
    """

    window_len: int = 64
    stride: int = 32
    channels: int = 1
    fft_peaks: int = 2
    feature_mask: tuple[str, ...] = ALL_FEATURES

    def __post_init__(self):
        w, s, c, p = self.window_len, self.stride, self.channels, self.fft_peaks
        if w < 2 or (w & (w - 1)) != 0:
            raise ConfigError(f"window_len must be a power of two >= 2, got {w}")
        if not 1 <= s <= w:
            raise ConfigError(f"stride must be in [1, window_len], got {s}")
        if c < 1:
            raise ConfigError(f"channels must be >= 1, got {c}")
        if not 0 <= p <= w // 2:
            raise ConfigError(f"fft_peaks must be in [0, window_len/2], got {p}")
        mask = tuple(dict.fromkeys(self.feature_mask))
        unknown = [f for f in mask if f not in ALL_FEATURES]
        if unknown:
            raise ConfigError(f"unknown features {unknown}; valid: {list(ALL_FEATURES)}")
        if not mask:
            raise ConfigError("feature_mask must enable at least one feature")
        object.__setattr__(self, "feature_mask", mask)

    @property
    def enabled_scalars(self) -> tuple[str, ...]:
        return tuple(f for f in SCALAR_FEATURES if f in self.feature_mask)

    @property
    def peaks_enabled(self) -> bool:
        return "fft_peaks" in self.feature_mask and self.fft_peaks > 0

    @property
    def dim(self) -> int:
        per_channel = len(self.enabled_scalars)
        if self.peaks_enabled:
            per_channel += 2 * self.fft_peaks
        return self.channels * per_channel


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-length vector of window indicators plus the emitting tick."""

    values: np.ndarray
    window_end: float

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def feature_layout(cfg: DspConfig) -> list[str]:
    """Human-readable name of each feature slot, in emission order."""
    names = []
    for c in range(cfg.channels):
        for s in cfg.enabled_scalars:
            names.append(f"ch{c}_{s}")
        if cfg.peaks_enabled:
            for p in range(1, cfg.fft_peaks + 1):
                names.append(f"ch{c}_peak{p}_bin")
                names.append(f"ch{c}_peak{p}_mag")
    return names


def fft_magnitudes(window: np.ndarray) -> np.ndarray:
    """Magnitudes of DFT bins 1..W/2 of a real window (DC excluded).

    Unnormalized convention: a unit-amplitude on-bin cosine yields W/2.
    """
    x = np.ascontiguousarray(window, dtype=np.float64)
    if x.ndim != 1:
        raise InputError("fft_magnitudes expects a 1-d window")
    n = x.shape[0]
    if n < 2 or (n & (n - 1)) != 0:
        raise ConfigError(f"window length must be a power of two, got {n}")
    return kernels.fft_mags(x)


def top_peaks(spectrum, count: int) -> list[tuple[int, float]]:
    """The ``count`` largest-magnitude bins of ``spectrum``.

    Sorted by descending magnitude, ties broken by lower bin index. Bins with
    zero magnitude never qualify; missing slots are filled with (0, 0.0).
    """
    mags = np.asarray(spectrum, dtype=np.float64)
    if count > mags.shape[0]:
        raise InputError(f"requested {count} peaks from a {mags.shape[0]}-bin spectrum")
    order = np.argsort(-mags, kind="stable")
    peaks: list[tuple[int, float]] = []
    for b in order[:count]:
        if mags[b] <= 0.0:
            break
        peaks.append((int(b), float(mags[b])))
    while len(peaks) < count:
        peaks.append((0, 0.0))
    return peaks


def compute_features(window, cfg: DspConfig) -> np.ndarray:
    """Feature vector of a full W x C window block (deterministic).

    The peak selector sees the spectrum of bins 1..W/2, so a peak at spectrum
    position i is DFT bin i+1; its normalized index is (i+1)/(W/2).
    """
    w = np.asarray(window, dtype=np.float64)
    if w.ndim == 1:
        w = w[:, None]
    if w.shape != (cfg.window_len, cfg.channels):
        raise InputError(
            f"window shape {w.shape} does not match "
            f"({cfg.window_len}, {cfg.channels})"
        )
    half = cfg.window_len // 2
    out = np.empty(cfg.dim, dtype=np.float64)
    pos = 0
    for c in range(cfg.channels):
        x = np.ascontiguousarray(w[:, c])
        for name in cfg.enabled_scalars:
            if name == "min":
                out[pos] = x.min()
            elif name == "max":
                out[pos] = x.max()
            elif name == "std":
                out[pos] = x.std()
            else:
                out[pos] = np.sqrt(np.mean(x * x))
            pos += 1
        if cfg.peaks_enabled:
            mags = kernels.fft_mags(x)
            for bin_idx, mag in top_peaks(mags, cfg.fft_peaks):
                if mag == 0.0:
                    out[pos] = 0.0
                    out[pos + 1] = 0.0
                else:
                    out[pos] = (bin_idx + 1) / half
                    out[pos + 1] = mag
                pos += 2
    return out


class WindowState:
    """Ring buffer over the last W samples of a C-channel stream.

    Single-owner mutable; memory use is O(W*C) and constant. Emits a
    FeatureVector when the window first fills and every ``stride`` samples
    after that.
    """

    def __init__(self, cfg: DspConfig):
        self.cfg = cfg
        self._buf = np.zeros((cfg.window_len, cfg.channels), dtype=np.float64)
        self._count = 0
        self._last_t = 0.0

    @property
    def samples_seen(self) -> int:
        return self._count

    def reset(self) -> None:
        self._count = 0

    def buffer_bytes(self, float_bytes: int = 4) -> int:
        """Window storage in target-width bytes (accounting hook)."""
        return self.cfg.window_len * self.cfg.channels * float_bytes

    def push(self, sample: Sample) -> FeatureVector | None:
        ch = np.asarray(sample.channels, dtype=np.float64)
        if ch.shape != (self.cfg.channels,):
            raise InputError(
                f"sample has {ch.shape[0] if ch.ndim == 1 else '?'} channels, "
                f"expected {self.cfg.channels}"
            )
        if not np.all(np.isfinite(ch)):
            raise InputError(f"non-finite sample value at t={sample.t}")
        w = self.cfg.window_len
        self._buf[self._count % w] = ch
        self._count += 1
        self._last_t = float(sample.t)
        if self._count < w or (self._count - w) % self.cfg.stride != 0:
            return None
        start = self._count % w
        ordered = np.vstack((self._buf[start:], self._buf[:start]))
        return FeatureVector(compute_features(ordered, self.cfg), self._last_t)
