"""Times the restricted-grid fold: compiled kernel vs numpy fallback.

Run with ``python benchmarks/bench_kernels.py``.
"""

import time

import numpy as np

from evstream import BlockDesign, build_grid
from evstream import _kernels_py as pure
from evstream.sim import block_count_streams

try:
    from evstream import _kernels as native
except ImportError:
    native = None

CASES = [
    # (replications, blocks, grid precision)
    (200, 500, 0.01),
    (1000, 1000, 0.01),
    (1000, 1000, 0.001),
]


def run(impl, counts_a, counts_b, prior, n_a, n_b):
    start = time.perf_counter()
    out = impl.restricted_log_e_batch(
        counts_a,
        counts_b,
        n_a,
        n_b,
        prior.theta_a,
        prior.theta_b,
        prior.weights,
        pure.DIFFERENCE_CODE,
        prior.delta,
    )
    return time.perf_counter() - start, out


def main() -> None:
    design = BlockDesign(1, 1)
    print(f"{'reps':>6} {'blocks':>7} {'grid':>6} {'pure':>9} {'native':>9} {'speedup':>8}")
    for reps, blocks, precision in CASES:
        counts_a, counts_b = block_count_streams(
            0.3, 0.5, design, blocks, reps, seed=1
        )
        prior = build_grid("difference", 0.1, precision, 0.18, 0.18)
        pure_time, pure_out = run(pure, counts_a, counts_b, prior, 1, 1)
        if native is None:
            print(f"{reps:>6} {blocks:>7} {prior.size:>6} {pure_time:>8.2f}s {'n/a':>9} {'n/a':>8}")
            continue
        native_time, native_out = run(native, counts_a, counts_b, prior, 1, 1)
        assert np.allclose(pure_out, native_out, atol=1e-9)
        print(
            f"{reps:>6} {blocks:>7} {prior.size:>6} {pure_time:>8.2f}s "
            f"{native_time:>8.2f}s {pure_time / native_time:>7.1f}x"
        )


if __name__ == "__main__":
    main()
