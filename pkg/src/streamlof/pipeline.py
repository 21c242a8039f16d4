"""End-to-end dataflow: windowed DSP -> reservoir (training) or LOF scoring
(detection), with explicit phase switching and cyclic retraining.

The pipeline mirrors a single device main loop: raw samples go in one at a
time; a feature vector emitted in the training phase is offered to the
reservoir, one emitted in the detection phase is scored against the frozen
model. Detection never mutates the reservoir or the model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from . import lof
from .dsp import ALL_FEATURES, DspConfig, Sample, WindowState
from .errors import ConfigError, InvalidStateError
from .lof import LofModel, LofParams
from .reservoir import Reservoir


class Phase(Enum):
    TRAINING = "training"
    DETECTING = "detecting"


class EventKind(Enum):
    NONE = "none"
    VECTOR_SAMPLED = "vector_sampled"
    RETRAINED = "retrained"
    SCORED = "scored"


@dataclass(frozen=True)
class PipelineEvent:
    kind: EventKind
    window_end: float | None = None
    score: float | None = None
    is_anomaly: bool | None = None
    model_size: int | None = None


_NONE_EVENT = PipelineEvent(EventKind.NONE)


@dataclass(frozen=True)
class PipelineConfig:
    """Full pipeline configuration; see README for the flat JSON schema."""

    dsp: DspConfig = field(default_factory=DspConfig)
    reservoir_capacity: int = 100
    lof: LofParams = field(default_factory=LofParams)
    threshold: float = 2.0
    retrain_every: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.threshold > 0.0:
            raise ConfigError(f"threshold must be > 0, got {self.threshold}")
        if self.reservoir_capacity < self.lof.min_pts + 1:
            raise ConfigError(
                f"reservoir_capacity must be >= min_pts+1 = {self.lof.min_pts + 1}, "
                f"got {self.reservoir_capacity}"
            )
        if self.retrain_every is not None and self.retrain_every < 1:
            raise ConfigError(f"retrain_every must be >= 1, got {self.retrain_every}")


_CONFIG_KEYS = {
    "window_len": int,
    "stride": int,
    "channels": int,
    "fft_peaks": int,
    "features": list,
    "reservoir_capacity": int,
    "min_pts": int,
    "zero_dist_floor": float,
    "threshold": float,
    "retrain_every": (int, type(None)),
    "seed": int,
}


def config_from_dict(doc: dict) -> PipelineConfig:
    """Build a PipelineConfig from the flat key-value schema."""
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a flat JSON object")
    unknown = sorted(set(doc) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    for key, value in doc.items():
        types = _CONFIG_KEYS[key]
        ok = isinstance(value, types) and not isinstance(value, bool)
        if key == "zero_dist_floor" or key == "threshold":
            ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if not ok:
            raise ConfigError(f"config key {key!r} has invalid value {value!r}")
    try:
        dsp = DspConfig(
            window_len=doc.get("window_len", 64),
            stride=doc.get("stride", 32),
            channels=doc.get("channels", 1),
            fft_peaks=doc.get("fft_peaks", 2),
            feature_mask=tuple(doc.get("features", ALL_FEATURES)),
        )
        params = LofParams(
            min_pts=doc.get("min_pts", 10),
            zero_dist_floor=float(doc.get("zero_dist_floor", 1e-9)),
        )
        return PipelineConfig(
            dsp=dsp,
            reservoir_capacity=doc.get("reservoir_capacity", 100),
            lof=params,
            threshold=float(doc.get("threshold", 2.0)),
            retrain_every=doc.get("retrain_every"),
            seed=doc.get("seed", 0),
        )
    except (ConfigError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> PipelineConfig:
    """Load the flat JSON config document from ``path``."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(doc)


def memory_footprint(cfg: PipelineConfig) -> int:
    """Exact worst-case bytes of window + reservoir + model storage.

    Accounting models the 32-bit deployment target: float32 values, uint16
    neighbour indexes. Pure function of the config; independent of how many
    samples ever flow through the pipeline. O(1) bookkeeping (counters, RNG
    state) is excluded.
    """
    parts = memory_breakdown(cfg)
    return parts["window"] + parts["reservoir"] + parts["model"]


def memory_breakdown(cfg: PipelineConfig) -> dict[str, int]:
    """Per-component byte accounting behind :func:`memory_footprint`."""
    d = cfg.dsp.dim
    k = cfg.reservoir_capacity
    return {
        "window": cfg.dsp.window_len * cfg.dsp.channels * 4,
        "reservoir": k * d * 4,
        "model": lof.model_storage_bytes(k, d, cfg.lof.min_pts),
    }


@dataclass
class Counters:
    vectors_sampled: int = 0
    scored: int = 0
    retrains: int = 0


class Pipeline:
    """Single-owner pipeline state machine (one device main loop)."""

    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        self.phase = Phase.TRAINING
        self.window = WindowState(cfg.dsp)
        self.reservoir = Reservoir(cfg.reservoir_capacity, cfg.dsp.dim, seed=cfg.seed)
        self.model: LofModel | None = None
        self.counters = Counters()
        self._since_retrain = 0

    def step(self, sample: Sample) -> PipelineEvent:
        """Feed one sample; returns what (if anything) the pipeline did."""
        vec = self.window.push(sample)
        if vec is None:
            return _NONE_EVENT
        if self.phase is Phase.TRAINING:
            self.reservoir.offer(vec.values)
            self.counters.vectors_sampled += 1
            self._since_retrain += 1
            if (
                self.cfg.retrain_every is not None
                and self._since_retrain >= self.cfg.retrain_every
            ):
                event = self.train_now()
                return PipelineEvent(
                    EventKind.RETRAINED,
                    window_end=vec.window_end,
                    model_size=event.model_size,
                )
            return PipelineEvent(EventKind.VECTOR_SAMPLED, window_end=vec.window_end)
        if self.model is None:
            raise InvalidStateError("detecting phase entered without a trained model")
        value = lof.score(self.model, vec.values)
        self.counters.scored += 1
        return PipelineEvent(
            EventKind.SCORED,
            window_end=vec.window_end,
            score=value,
            is_anomaly=value > self.cfg.threshold,
        )

    def set_phase(self, phase: Phase, train_if_needed: bool = False) -> None:
        """Switch phase; resets the window so no half-window leaks across.

        Switching to detection requires a trained model; with
        ``train_if_needed`` the pipeline trains on the current reservoir
        first.
        """
        if phase is Phase.DETECTING and self.model is None:
            if not train_if_needed:
                raise InvalidStateError(
                    "cannot enter detection phase without a trained model"
                )
            self.train_now()
        self.window.reset()
        self.phase = phase

    def train_now(self) -> PipelineEvent:
        """Train on the reservoir snapshot, replacing any previous model."""
        snap = self.reservoir.snapshot()
        params = self.cfg.lof.clamped(snap.shape[0])
        self.model = lof.train(snap, params)
        self.counters.retrains += 1
        self._since_retrain = 0
        return PipelineEvent(EventKind.RETRAINED, model_size=snap.shape[0])

    def reset_reservoir(self) -> None:
        """Reset-style retraining policy: drop contents and stream counter."""
        self.reservoir.reset()

    def allocated_bytes(self) -> int:
        """Target-width bytes of the buffers this pipeline currently owns.

        Always <= memory_footprint(cfg): the footprint is the worst case
        (full reservoir, model trained on a full snapshot).
        """
        total = self.window.buffer_bytes()
        total += self.reservoir.size * self.reservoir.dim * 4
        if self.model is not None:
            total += lof.model_storage_bytes(
                self.model.n_points, self.model.dim, self.model.params.min_pts
            )
        return total
