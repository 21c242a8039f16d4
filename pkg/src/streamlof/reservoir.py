"""Single-pass uniform sampling of a fixed number of vectors from a stream.

Classic Algorithm R: the first k offers fill the reservoir; offer number n>k
replaces a uniformly chosen slot with probability k/n. After any prefix of
the stream, every offered item is retained with probability k/n. One RNG draw
per offer, O(1) time, O(k*d) memory regardless of stream length.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError, InputError


class OfferOutcome(Enum):
    APPENDED = "appended"
    REPLACED = "replaced"
    REJECTED = "rejected"


@dataclass(frozen=True)
class Decision:
    """Outcome of one offer; ``slot`` is the 0-based slot written, if any."""

    outcome: OfferOutcome
    slot: int | None = None


class Reservoir:
    """Uniform random sample of up to ``capacity`` d-dimensional vectors.

    Deterministic for a fixed seed and offer sequence (PCG64 stream; one
    uniform integer draw per offer once full). Single-owner mutable.
    """

    def __init__(self, capacity: int, dim: int, seed: int = 0):
        if capacity < 1:
            raise ConfigError(f"reservoir capacity must be >= 1, got {capacity}")
        if dim < 1:
            raise ConfigError(f"vector dimension must be >= 1, got {dim}")
        self.capacity = capacity
        self.dim = dim
        self.seed = seed
        self._items = np.zeros((capacity, dim), dtype=np.float64)
        self._seen = 0
        self._rng = np.random.default_rng(seed)

    @property
    def seen(self) -> int:
        """Total number of vectors offered so far (the stream length n)."""
        return self._seen

    @property
    def size(self) -> int:
        """Number of stored vectors: min(capacity, seen)."""
        return min(self.capacity, self._seen)

    def offer(self, vector) -> Decision:
        """Offer one vector; append, replace a random slot, or reject it."""
        v = np.asarray(vector, dtype=np.float64)
        if v.shape != (self.dim,):
            raise InputError(f"vector shape {v.shape} does not match ({self.dim},)")
        self._seen += 1
        if self._seen <= self.capacity:
            slot = self._seen - 1
            self._items[slot] = v
            return Decision(OfferOutcome.APPENDED, slot)
        j = int(self._rng.integers(1, self._seen + 1))
        if j <= self.capacity:
            self._items[j - 1] = v
            return Decision(OfferOutcome.REPLACED, j - 1)
        return Decision(OfferOutcome.REJECTED)

    def snapshot(self) -> np.ndarray:
        """Immutable copy of the stored vectors in slot order."""
        snap = self._items[: self.size].copy()
        snap.setflags(write=False)
        return snap

    def reset(self) -> None:
        """Drop all contents and restart the stream counter and RNG."""
        self._seen = 0
        self._rng = np.random.default_rng(self.seed)

    def storage_bytes(self, float_bytes: int = 4) -> int:
        """Full-capacity storage in target-width bytes (accounting hook)."""
        return self.capacity * self.dim * float_bytes
