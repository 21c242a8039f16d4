"""Backend selection for the numeric hot paths.

Two interchangeable kernel sets exist: a numba-jitted one (default when numba
imports) and a pure-numpy one. The ``STREAMLOF_BACKEND`` environment variable
picks the backend at import time (``auto``, ``numba`` or ``numpy``);
:func:`use_backend` switches at runtime, which the benchmark uses to compare
both in one process.
"""

from __future__ import annotations

import os
import warnings

from . import _kernels_numpy
from .errors import ConfigError

ENV_VAR = "STREAMLOF_BACKEND"

try:
    from . import _kernels_numba
except ImportError:
    _kernels_numba = None

_IMPLS = {"numpy": _kernels_numpy}
if _kernels_numba is not None:
    _IMPLS["numba"] = _kernels_numba


def available_backends():
    return sorted(_IMPLS)


def _resolve(name):
    name = (name or "auto").strip().lower()
    if name == "auto":
        return "numba" if "numba" in _IMPLS else "numpy"
    if name not in ("numba", "numpy"):
        raise ConfigError(f"unknown backend {name!r}; expected auto, numba or numpy")
    if name not in _IMPLS:
        warnings.warn("numba backend requested but numba is not importable; "
                      "falling back to numpy", RuntimeWarning, stacklevel=3)
        return "numpy"
    return name


_active = _resolve(os.environ.get(ENV_VAR))


def active_backend() -> str:
    return _active


def use_backend(name: str | None) -> str:
    """Switch the process-wide kernel backend; returns the resolved name."""
    global _active
    _active = _resolve(name)
    return _active


def impl(name: str | None = None):
    """Kernel module for ``name`` (default: the active backend)."""
    return _IMPLS[_resolve(name) if name is not None else _active]


def train_arrays(points, kappa, eps):
    return impl().train_arrays(points, kappa, eps)


def score_batch(points, k_dist, lrd, queries, kappa, eps):
    return impl().score_batch(points, k_dist, lrd, queries, kappa, eps)


def knn_query(points, q, kappa, exclude=-1):
    return impl().knn_query(points, q, kappa, exclude)


def fft_mags(x):
    return impl().fft_mags(x)
