"""Pure-numpy kernel implementations (fallback backend).

Mirrors the numba backend exactly: same tie-breaking (lower index wins on
equal distance), same floor rules, same formula shapes. Distances are always
computed as sqrt(sum((a-b)^2)) -- never the expanded a^2-2ab+b^2 form, whose
cancellation error would break the duplicate-point floor semantics.

Row blocks keep peak temporary memory at O(block * m) instead of O(m^2).
"""

from __future__ import annotations

import numpy as np

_BLOCK = 32


def _knn_block(block, points, kappa, self_offset):
    """kappa nearest neighbours for a block of query rows.

    self_offset >= 0 marks block row r as training point self_offset + r and
    excludes it from its own neighbourhood; -1 disables exclusion.
    """
    diffs = block[:, None, :] - points[None, :, :]
    dists = np.sqrt(np.einsum("bmd,bmd->bm", diffs, diffs))
    if self_offset >= 0:
        rows = np.arange(block.shape[0])
        dists[rows, self_offset + rows] = np.inf
    order = np.argsort(dists, axis=1, kind="stable")[:, :kappa]
    return order, np.take_along_axis(dists, order, axis=1)


def train_arrays(points, kappa, eps):
    """Neighbour table, k-distances and local reachability densities."""
    m = points.shape[0]
    neighbors = np.empty((m, kappa), dtype=np.int64)
    nbr_dists = np.empty((m, kappa), dtype=np.float64)
    for start in range(0, m, _BLOCK):
        stop = min(start + _BLOCK, m)
        idx, nd = _knn_block(points[start:stop], points, kappa, start)
        neighbors[start:stop] = idx
        nbr_dists[start:stop] = nd
    k_dist = np.maximum(nbr_dists[:, -1], eps)
    reach = np.maximum(k_dist[neighbors], nbr_dists)
    lrd = kappa / reach.sum(axis=1)
    return neighbors, nbr_dists, k_dist, lrd


def score_batch(points, k_dist, lrd, queries, kappa, eps):
    """LOF novelty scores for a batch of query vectors."""
    nq = queries.shape[0]
    scores = np.empty(nq, dtype=np.float64)
    for start in range(0, nq, _BLOCK):
        stop = min(start + _BLOCK, nq)
        idx, nd = _knn_block(queries[start:stop], points, kappa, -1)
        reach = np.maximum(np.maximum(k_dist[idx], nd), eps)
        lrd_q = kappa / reach.sum(axis=1)
        scores[start:stop] = lrd[idx].sum(axis=1) / (kappa * lrd_q)
    return scores


def knn_query(points, q, kappa, exclude=-1):
    """Indices and distances of the kappa nearest points to q."""
    diff = points - q[None, :]
    dists = np.sqrt(np.einsum("md,md->m", diff, diff))
    if exclude >= 0:
        dists = dists.copy()
        dists[exclude] = np.inf
    order = np.argsort(dists, kind="stable")[:kappa]
    return order, dists[order]


def fft_mags(x):
    """Magnitudes of DFT bins 1..W/2 (DC excluded), unnormalized."""
    return np.abs(np.fft.rfft(x))[1:]
