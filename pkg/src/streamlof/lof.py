"""Local Outlier Factor training and novelty scoring.

Training computes, for every point of the training matrix, its kappa nearest
neighbours (Euclidean, ties broken by lower index), its k-distance (floored
at a small positive eps so duplicate points stay finite) and its local
reachability density lrd = kappa / sum(reachability distances). Scoring runs
in novelty mode: a query is compared against the frozen training arrays and
never updates them. A score near 1 means the query's local density matches
its neighbourhood; values well above 1 indicate an outlier.

Neighbourhoods are truncated to exactly kappa members even under distance
ties (fixed-size arrays are mandatory under the memory budget); this deviates
from the textbook definition only on exact ties.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import InputError, InsufficientPointsError

MODEL_MAGIC = b"SLOF"
MODEL_VERSION = 1
_HEADER = struct.Struct("<4sIIIIf")


@dataclass(frozen=True)
class LofParams:
    """Neighbourhood size and the zero-distance floor."""

    min_pts: int = 10
    zero_dist_floor: float = 1e-9

    def __post_init__(self):
        if self.min_pts < 1:
            raise InputError(f"min_pts must be >= 1, got {self.min_pts}")
        if not self.zero_dist_floor > 0.0:
            raise InputError("zero_dist_floor must be > 0")

    def clamped(self, n_points: int) -> "LofParams":
        """min_pts clamped to n_points - 1 for small training sets."""
        if n_points < 2:
            raise InsufficientPointsError(
                f"need at least 2 points to train, got {n_points}"
            )
        return replace(self, min_pts=min(self.min_pts, n_points - 1))


@dataclass(frozen=True)
class LofModel:
    """Frozen training artifact; immutable and safely shareable.

    ``neighbors`` is None for models loaded from disk (the serialized layout
    stores only what scoring needs: points, k_dist, lrd).
    """

    points: np.ndarray
    k_dist: np.ndarray
    lrd: np.ndarray
    params: LofParams
    neighbors: np.ndarray | None = None

    def __post_init__(self):
        for name in ("points", "k_dist", "lrd", "neighbors"):
            arr = getattr(self, name)
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _as_points_matrix(points) -> np.ndarray:
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise InputError(f"expected a 2-d points matrix, got ndim={pts.ndim}")
    if not np.all(np.isfinite(pts)):
        raise InputError("points contain non-finite values")
    return pts


def train(points, params: LofParams) -> LofModel:
    """Train a LOF model over a training matrix.

    O(m^2 * d) time and O(m*kappa + m*d) memory. Raises
    InsufficientPointsError when m <= min_pts.
    """
    pts = _as_points_matrix(points)
    m = pts.shape[0]
    kappa = params.min_pts
    if m <= kappa:
        raise InsufficientPointsError(
            f"training needs at least min_pts+1 = {kappa + 1} points, got {m}"
        )
    neighbors, _, k_dist, lrd = kernels.train_arrays(
        pts, kappa, params.zero_dist_floor
    )
    return LofModel(
        points=pts.copy(),
        k_dist=k_dist,
        lrd=lrd,
        params=params,
        neighbors=neighbors,
    )


def _as_query(model: LofModel, q) -> np.ndarray:
    qv = np.ascontiguousarray(q, dtype=np.float64)
    if qv.shape != (model.dim,):
        raise InputError(f"query shape {qv.shape} does not match ({model.dim},)")
    if not np.all(np.isfinite(qv)):
        raise InputError("query contains non-finite values")
    return qv


def score(model: LofModel, q) -> float:
    """Novelty score of one query vector against the frozen model. O(m*d)."""
    qv = _as_query(model, q)
    return float(
        kernels.score_batch(
            model.points,
            model.k_dist,
            model.lrd,
            qv[None, :],
            model.params.min_pts,
            model.params.zero_dist_floor,
        )[0]
    )


def score_batch(model: LofModel, queries) -> np.ndarray:
    """Novelty scores for a (Q, d) batch of query vectors."""
    qs = np.ascontiguousarray(queries, dtype=np.float64)
    if qs.ndim != 2 or qs.shape[1] != model.dim:
        raise InputError(f"queries shape {qs.shape} does not match (*, {model.dim})")
    if not np.all(np.isfinite(qs)):
        raise InputError("queries contain non-finite values")
    return kernels.score_batch(
        model.points,
        model.k_dist,
        model.lrd,
        qs,
        model.params.min_pts,
        model.params.zero_dist_floor,
    )


def score_components(model: LofModel, q) -> dict:
    """Scoring intermediates for one query (introspection for validation).

    Returns neighbour indices, their raw distances, the floored reachability
    distances, lrd of the query and the final score.
    """
    qv = _as_query(model, q)
    kappa = model.params.min_pts
    eps = model.params.zero_dist_floor
    idx, dists = kernels.knn_query(model.points, qv, kappa, -1)
    idx = np.asarray(idx)
    dists = np.asarray(dists)
    reach = np.maximum(np.maximum(model.k_dist[idx], dists), eps)
    lrd_q = kappa / reach.sum()
    value = float(model.lrd[idx].sum() / (kappa * lrd_q))
    return {
        "neighbors": idx,
        "distances": dists,
        "reach_dists": reach,
        "lrd_q": float(lrd_q),
        "score": value,
    }


def knn(points, q, kappa: int, exclude: int | None = None):
    """Indices and distances of the kappa nearest points to q.

    Exact brute-force scan; ties broken by lower index. ``exclude`` removes
    one index (a point's self) from consideration.
    """
    pts = _as_points_matrix(points)
    qv = np.ascontiguousarray(q, dtype=np.float64)
    if qv.shape != (pts.shape[1],):
        raise InputError(f"query shape {qv.shape} does not match ({pts.shape[1]},)")
    available = pts.shape[0] - (1 if exclude is not None else 0)
    if kappa > available:
        raise InsufficientPointsError(
            f"requested {kappa} neighbours from {available} available points"
        )
    idx, dists = kernels.knn_query(
        pts, qv, kappa, -1 if exclude is None else exclude
    )
    return np.asarray(idx), np.asarray(dists)


def model_storage_bytes(n_points: int, dim: int, min_pts: int) -> int:
    """Model storage in target-width bytes: float32 arrays plus uint16
    neighbour indexes (points + k_dist + lrd + neighbours)."""
    return n_points * dim * 4 + n_points * 4 + n_points * 4 + n_points * min_pts * 2


def save_model(model: LofModel, path) -> None:
    """Write the versioned little-endian binary layout codegen also embeds.

    Header: magic, version, m, d, min_pts, eps; then points row-major,
    k_dist, lrd, all as 32-bit floats.
    """
    header = _HEADER.pack(
        MODEL_MAGIC,
        MODEL_VERSION,
        model.n_points,
        model.dim,
        model.params.min_pts,
        model.params.zero_dist_floor,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(model.points, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(model.k_dist, dtype="<f4").tobytes())
        fh.write(np.ascontiguousarray(model.lrd, dtype="<f4").tobytes())


def load_model(path) -> LofModel:
    """Read a model written by :func:`save_model`; validates the layout."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise InputError(f"model file too short for header: {len(blob)} bytes")
    magic, version, m, d, kappa, eps = _HEADER.unpack_from(blob)
    if magic != MODEL_MAGIC:
        raise InputError(f"bad model magic {magic!r}, expected {MODEL_MAGIC!r}")
    if version != MODEL_VERSION:
        raise InputError(f"unsupported model version {version}")
    expected = _HEADER.size + 4 * (m * d + m + m)
    if len(blob) != expected:
        raise InputError(
            f"model file is {len(blob)} bytes, expected {expected} "
            f"for m={m}, d={d}"
        )
    if m < 2 or d < 1 or not 1 <= kappa <= m - 1:
        raise InputError(f"inconsistent model header: m={m}, d={d}, min_pts={kappa}")
    off = _HEADER.size
    points = np.frombuffer(blob, dtype="<f4", count=m * d, offset=off)
    off += 4 * m * d
    k_dist = np.frombuffer(blob, dtype="<f4", count=m, offset=off)
    off += 4 * m
    lrd = np.frombuffer(blob, dtype="<f4", count=m, offset=off)
    return LofModel(
        points=points.astype(np.float64).reshape(m, d),
        k_dist=k_dist.astype(np.float64),
        lrd=lrd.astype(np.float64),
        params=LofParams(min_pts=kappa, zero_dist_floor=float(eps)),
        neighbors=None,
    )
