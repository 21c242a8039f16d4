"""numba-jitted kernel implementations (default backend when available).

Explicit loops, O(m*kappa + m*d) working memory for training (no full
distance matrix), serial execution so results are reproducible. Neighbour
selection scans candidates in ascending index order and inserts only on a
strict distance decrease, which breaks ties toward the lower index exactly
like the stable argsort in the numpy backend.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _select_nearest(dists_scratch, idx_scratch, kappa, cand_dist, cand_idx, count):
    # Insertion step of a bounded selection sort; returns updated count.
    if count < kappa:
        pos = count
        count += 1
    elif cand_dist < dists_scratch[kappa - 1]:
        pos = kappa - 1
    else:
        return count
    dists_scratch[pos] = cand_dist
    idx_scratch[pos] = cand_idx
    while pos > 0 and dists_scratch[pos] < dists_scratch[pos - 1]:
        dists_scratch[pos], dists_scratch[pos - 1] = (
            dists_scratch[pos - 1],
            dists_scratch[pos],
        )
        idx_scratch[pos], idx_scratch[pos - 1] = idx_scratch[pos - 1], idx_scratch[pos]
        pos -= 1
    return count


@njit(cache=True)
def train_arrays(points, kappa, eps):
    m, d = points.shape
    neighbors = np.empty((m, kappa), dtype=np.int64)
    nbr_dists = np.empty((m, kappa), dtype=np.float64)
    k_dist = np.empty(m, dtype=np.float64)
    dist_scratch = np.empty(kappa, dtype=np.float64)
    idx_scratch = np.empty(kappa, dtype=np.int64)
    for i in range(m):
        count = 0
        for j in range(m):
            if j == i:
                continue
            acc = 0.0
            for f in range(d):
                diff = points[i, f] - points[j, f]
                acc += diff * diff
            count = _select_nearest(
                dist_scratch, idx_scratch, kappa, math.sqrt(acc), j, count
            )
        for c in range(kappa):
            neighbors[i, c] = idx_scratch[c]
            nbr_dists[i, c] = dist_scratch[c]
        kd = dist_scratch[kappa - 1]
        k_dist[i] = kd if kd > eps else eps
    lrd = np.empty(m, dtype=np.float64)
    for i in range(m):
        reach_sum = 0.0
        for c in range(kappa):
            j = neighbors[i, c]
            rd = nbr_dists[i, c]
            if k_dist[j] > rd:
                rd = k_dist[j]
            reach_sum += rd
        lrd[i] = kappa / reach_sum
    return neighbors, nbr_dists, k_dist, lrd


@njit(cache=True)
def score_batch(points, k_dist, lrd, queries, kappa, eps):
    nq = queries.shape[0]
    m, d = points.shape
    scores = np.empty(nq, dtype=np.float64)
    dist_scratch = np.empty(kappa, dtype=np.float64)
    idx_scratch = np.empty(kappa, dtype=np.int64)
    for qi in range(nq):
        count = 0
        for j in range(m):
            acc = 0.0
            for f in range(d):
                diff = queries[qi, f] - points[j, f]
                acc += diff * diff
            count = _select_nearest(
                dist_scratch, idx_scratch, kappa, math.sqrt(acc), j, count
            )
        reach_sum = 0.0
        lrd_sum = 0.0
        for c in range(kappa):
            j = idx_scratch[c]
            rd = dist_scratch[c]
            if k_dist[j] > rd:
                rd = k_dist[j]
            if rd < eps:
                rd = eps
            reach_sum += rd
            lrd_sum += lrd[j]
        lrd_q = kappa / reach_sum
        scores[qi] = lrd_sum / (kappa * lrd_q)
    return scores


@njit(cache=True)
def knn_query(points, q, kappa, exclude=-1):
    m, d = points.shape
    dist_scratch = np.empty(kappa, dtype=np.float64)
    idx_scratch = np.empty(kappa, dtype=np.int64)
    count = 0
    for j in range(m):
        if j == exclude:
            continue
        acc = 0.0
        for f in range(d):
            diff = q[f] - points[j, f]
            acc += diff * diff
        count = _select_nearest(
            dist_scratch, idx_scratch, kappa, math.sqrt(acc), j, count
        )
    return idx_scratch, dist_scratch


@njit(cache=True)
def fft_mags(x):
    # Iterative radix-2 over float64 real/imag arrays; W is a power of two.
    n = x.shape[0]
    re = x.copy()
    im = np.zeros(n, dtype=np.float64)
    j = 0
    for i in range(1, n):
        bit = n >> 1
        while j & bit:
            j ^= bit
            bit >>= 1
        j |= bit
        if i < j:
            re[i], re[j] = re[j], re[i]
    length = 2
    while length <= n:
        half = length >> 1
        ang = -2.0 * math.pi / length
        for start in range(0, n, length):
            for k in range(half):
                wr = math.cos(ang * k)
                wi = math.sin(ang * k)
                i0 = start + k
                i1 = i0 + half
                tr = re[i1] * wr - im[i1] * wi
                ti = re[i1] * wi + im[i1] * wr
                re[i1] = re[i0] - tr
                im[i1] = im[i0] - ti
                re[i0] += tr
                im[i0] += ti
        length <<= 1
    out = np.empty(n // 2, dtype=np.float64)
    for b in range(1, n // 2 + 1):
        out[b - 1] = math.sqrt(re[b] * re[b] + im[b] * im[b])
    return out
