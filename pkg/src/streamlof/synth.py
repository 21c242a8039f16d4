"""Deterministic synthetic vibration data with labelled regimes.

Stands in for a physical testbed: each regime is a base tone plus a second
harmonic and Gaussian noise on every channel, with per-regime frequency and
amplitude. Regime 0 is the off state (noise only). Same seed, same bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class Regime:
    name: str
    freq_hz: float
    amplitude: float
    noise_std: float


# Amplitudes deliberately sit closer to each other than to zero so the off
# state is farther from every running regime than the regimes are from each
# other in feature space.
FAN_REGIMES = (
    Regime("off", 0.0, 0.0, 0.02),
    Regime("speed1", 13.0, 1.0, 0.05),
    Regime("speed2", 23.0, 1.3, 0.08),
    Regime("speed3", 31.0, 1.6, 0.12),
)

PROFILES = {"fan": FAN_REGIMES}

# Fixed per-channel phase offsets and harmonic gains (3 channels).
_PHASES = (0.0, 2.0943951023931953, 4.1887902047863905)
_H2_GAIN = (0.30, 0.22, 0.38)


def regime_samples(
    regime: Regime,
    n_samples: int,
    rate_hz: float,
    rng: np.random.Generator,
    channels: int = 3,
    t0: int = 0,
) -> np.ndarray:
    """(n_samples, channels) block of one regime, starting at tick t0."""
    t = (t0 + np.arange(n_samples)) / rate_hz
    out = np.empty((n_samples, channels), dtype=np.float64)
    for c in range(channels):
        phase = _PHASES[c % len(_PHASES)]
        h2 = _H2_GAIN[c % len(_H2_GAIN)]
        base = np.sin(2.0 * np.pi * regime.freq_hz * t + phase)
        second = h2 * np.sin(4.0 * np.pi * regime.freq_hz * t + 2.0 * phase)
        out[:, c] = regime.amplitude * (base + second)
    out += rng.normal(0.0, 1.0, size=out.shape) * np.array(
        [regime.noise_std] * channels
    )
    return out


def generate_profile(
    profile: str,
    duration_s: float,
    rate_hz: float = 100.0,
    seed: int = 0,
    channels: int = 3,
):
    """Full multi-regime sweep: (values (N, C), regime_ids (N,), regimes)."""
    if profile not in PROFILES:
        raise InputError(
            f"unknown profile {profile!r}; available: {sorted(PROFILES)}"
        )
    regimes = PROFILES[profile]
    total = int(round(duration_s * rate_hz))
    seg = total // len(regimes)
    rng = np.random.default_rng(seed)
    blocks = []
    ids = np.empty(total, dtype=np.int64)
    t0 = 0
    for r, regime in enumerate(regimes):
        n = seg if r < len(regimes) - 1 else total - seg * (len(regimes) - 1)
        blocks.append(regime_samples(regime, n, rate_hz, rng, channels, t0))
        ids[t0 : t0 + n] = r
        t0 += n
    return np.vstack(blocks), ids, regimes


def write_csv(
    path,
    values: np.ndarray,
    regime_ids: np.ndarray,
    controls: dict[int, str] | None = None,
) -> None:
    """Write the stream CSV: t, ch1..chC, regime[, control]."""
    n, c = values.shape
    controls = controls or {}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        cols = ["t"] + [f"ch{i + 1}" for i in range(c)] + ["regime"]
        if controls:
            cols.append("control")
        fh.write(",".join(cols) + "\n")
        for i in range(n):
            row = [str(i)] + [f"{v:.6f}" for v in values[i]] + [str(regime_ids[i])]
            if controls:
                row.append(controls.get(i, ""))
            fh.write(",".join(row) + "\n")
