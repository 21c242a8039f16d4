"""Wall-clock scaling benchmark for training and scoring.

For each reservoir size m the harness times model training and novelty
scoring and reports the median over repetitions plus every raw sample, so
the quadratic-train / linear-score shape can be re-fit from the output.
Scoring is timed over a fixed query batch and reported per query, which
amortizes timer and dispatch overhead that would otherwise flatten the
O(m) trend at small m. Repetitions run sequentially on one thread; parallel
timing would corrupt the measurements.

The harness can run on one kernel backend or on both for comparison.
"""

from __future__ import annotations

import time

import numpy as np

from . import kernels, lof
from .errors import InputError
from .lof import LofParams


def fit_exponent(sizes, times) -> float:
    """Least-squares slope of log(time) against log(size)."""
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.log(np.asarray(times, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


def _timed_samples(fn, reps: int, min_sample_ns: int = 500_000) -> list[int]:
    """Per-call wall times (ns); inner loop sized so samples are stable."""
    fn()
    t0 = time.perf_counter_ns()
    fn()
    est = max(time.perf_counter_ns() - t0, 1)
    inner = max(1, int(min_sample_ns // est) + 1) if est < min_sample_ns else 1
    samples = []
    for _ in range(reps):
        start = time.perf_counter_ns()
        for _ in range(inner):
            fn()
        samples.append((time.perf_counter_ns() - start) // inner)
    return samples


def run_bench(
    sizes,
    reps: int = 9,
    dim: int = 64,
    min_pts: int = 5,
    n_queries: int = 256,
    seed: int = 0,
    backends=None,
) -> dict:
    """Run the scaling benchmark; returns the JSON-compatible report.

    ``backends`` is a list of backend names (default: the active backend).
    Sizes too small to train (m < 2) produce a skipped marker row.
    """
    sizes = list(sizes)
    if sizes != sorted(sizes):
        raise InputError("bench sizes must be ascending")
    if backends is None:
        backends = [kernels.active_backend()]
    rng = np.random.default_rng(seed)
    datasets = {m: rng.normal(size=(m, dim)) for m in sizes}
    queries = rng.normal(size=(n_queries, dim))
    report = {
        "meta": {
            "dim": dim,
            "min_pts": min_pts,
            "n_queries": n_queries,
            "reps": reps,
            "seed": seed,
            "timer": "perf_counter_ns",
            "score_unit": "ns_per_query",
        },
        "results": [],
        "fits": {},
    }
    previous = kernels.active_backend()
    try:
        for backend in backends:
            resolved = kernels.use_backend(backend)
            train_medians: dict[int, int] = {}
            score_medians: dict[int, int] = {}
            for m in sizes:
                if m < 2:
                    report["results"].append(
                        {"size": m, "op": "train", "backend": resolved,
                         "skipped": "needs at least 2 points"}
                    )
                    continue
                pts = datasets[m]
                params = LofParams(min_pts=min_pts).clamped(m)
                kappa = params.min_pts
                eps = params.zero_dist_floor

                train_samples = _timed_samples(
                    lambda: kernels.train_arrays(pts, kappa, eps), reps
                )
                model = lof.train(pts, params)
                score_samples = _timed_samples(
                    lambda: kernels.score_batch(
                        model.points, model.k_dist, model.lrd, queries, kappa, eps
                    ),
                    reps,
                )
                score_samples = [s // n_queries for s in score_samples]
                train_medians[m] = int(np.median(train_samples))
                score_medians[m] = int(np.median(score_samples))
                report["results"].append(
                    {"size": m, "op": "train", "backend": resolved,
                     "median_ns": train_medians[m], "samples": train_samples}
                )
                report["results"].append(
                    {"size": m, "op": "score", "backend": resolved,
                     "median_ns": score_medians[m], "samples": score_samples}
                )
            if len(train_medians) >= 2:
                ms = sorted(train_medians)
                report["fits"][resolved] = {
                    "train_exponent": fit_exponent(
                        ms, [train_medians[m] for m in ms]
                    ),
                    "score_exponent": fit_exponent(
                        ms, [score_medians[m] for m in ms]
                    ),
                }
    finally:
        kernels.use_backend(previous)
    return report
