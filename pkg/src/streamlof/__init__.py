"""Streaming anomaly detection under a fixed memory budget.

Sliding-window DSP features over multi-channel time series, reservoir-sampled
training sets, LOF novelty scoring, and a generator that bakes a trained
model into portable C for firmware.
"""

from .codegen import CSources, EmitOptions, emit_c_model, emit_manifest
from .dsp import (
    ALL_FEATURES,
    DspConfig,
    FeatureVector,
    Sample,
    WindowState,
    compute_features,
    feature_layout,
    fft_magnitudes,
    top_peaks,
)
from .errors import (
    ConfigError,
    InputError,
    InsufficientPointsError,
    InvalidStateError,
    StreamLofError,
)
from .kernels import active_backend, available_backends, use_backend
from .lof import (
    LofModel,
    LofParams,
    knn,
    load_model,
    save_model,
    score,
    score_batch,
    train,
)
from .pipeline import (
    EventKind,
    Phase,
    Pipeline,
    PipelineConfig,
    PipelineEvent,
    config_from_dict,
    load_config,
    memory_breakdown,
    memory_footprint,
)
from .reservoir import Decision, OfferOutcome, Reservoir

__version__ = "0.1.0"

__all__ = [
    "ALL_FEATURES",
    "CSources",
    "ConfigError",
    "Decision",
    "DspConfig",
    "EmitOptions",
    "EventKind",
    "FeatureVector",
    "InputError",
    "InsufficientPointsError",
    "InvalidStateError",
    "LofModel",
    "LofParams",
    "OfferOutcome",
    "Phase",
    "Pipeline",
    "PipelineConfig",
    "PipelineEvent",
    "Reservoir",
    "Sample",
    "StreamLofError",
    "WindowState",
    "active_backend",
    "available_backends",
    "compute_features",
    "config_from_dict",
    "emit_c_model",
    "emit_manifest",
    "feature_layout",
    "fft_magnitudes",
    "knn",
    "load_config",
    "load_model",
    "memory_breakdown",
    "memory_footprint",
    "save_model",
    "score",
    "score_batch",
    "top_peaks",
    "train",
    "use_backend",
    "__version__",
]
