"""Kernel selection and the batched fold entry points used by the
simulation harness.

The restricted-grid fold has a compiled implementation; at import we
pick it when the extension built (set ``EVSTREAM_PURE=1`` to force the
numpy fallback). Replications are independent, so the fold may be
chunked across worker threads; results are written back by replication
index and do not depend on the worker count. ``SAFE_TEST_THREADS`` caps
the workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels_py
from .core import BlockDesign
from .restricted import Divergence, RestrictedPrior

if os.environ.get("EVSTREAM_PURE"):
    _native = None
else:
    try:
        from . import _kernels as _native
    except ImportError:
        _native = None

HAVE_NATIVE = _native is not None

point_log_e_batch = _kernels_py.point_log_e_batch
beta_log_e_batch = _kernels_py.beta_log_e_batch
fisher_curve_batch = _kernels_py.fisher_curve_batch

_DIVERGENCE_CODES = {
    Divergence.DIFFERENCE: _kernels_py.DIFFERENCE_CODE,
    Divergence.LOG_ODDS_RATIO: _kernels_py.LOG_ODDS_CODE,
}


def max_workers() -> int:
    value = os.environ.get("SAFE_TEST_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        return 1


def restricted_log_e_batch(
    counts_a: np.ndarray,
    counts_b: np.ndarray,
    design: BlockDesign,
    prior: RestrictedPrior,
    workers: "int | None" = None,
) -> np.ndarray:
    """Cumulative log e-value per replication for a grid-restricted model."""
    impl = _native.restricted_log_e_batch if _native else _kernels_py.restricted_log_e_batch
    counts_a = np.ascontiguousarray(counts_a, dtype=np.int64)
    counts_b = np.ascontiguousarray(counts_b, dtype=np.int64)
    code = _DIVERGENCE_CODES[prior.divergence]

    def run(slice_a, slice_b):
        return impl(
            slice_a,
            slice_b,
            design.n_a,
            design.n_b,
            prior.theta_a,
            prior.theta_b,
            prior.weights,
            code,
            prior.delta,
        )

    workers = max_workers() if workers is None else max(1, workers)
    reps = counts_a.shape[0]
    if workers == 1 or reps < 2 * workers:
        return run(counts_a, counts_b)

    bounds = np.linspace(0, reps, workers + 1, dtype=int)
    out = np.empty((reps, counts_a.shape[1]), dtype=float)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            (
                lo,
                hi,
                pool.submit(run, counts_a[lo:hi], counts_b[lo:hi]),
            )
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for lo, hi, fut in futures:
            out[lo:hi] = fut.result()
    return out
