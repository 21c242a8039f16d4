import numpy as np
import pytest

from streamlof import kernels


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    """Run the decorated test once per available kernel backend."""
    previous = kernels.active_backend()
    kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(previous)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # Touch every kernel on every backend once so JIT compilation happens
    # up front and timed tests measure steady-state behaviour.
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(8, 3))
    queries = rng.normal(size=(2, 3))
    window = rng.normal(size=16)
    for name in kernels.available_backends():
        impl = kernels.impl(name)
        _, _, k_dist, lrd = impl.train_arrays(pts, 2, 1e-9)
        impl.score_batch(pts, k_dist, lrd, queries, 2, 1e-9)
        impl.knn_query(pts, queries[0], 2, -1)
        impl.fft_mags(window)
