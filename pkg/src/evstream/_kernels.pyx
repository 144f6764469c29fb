# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of the restricted-grid fold in ``_kernels_py``.

One fused pass per block instead of several array temporaries; the main
loop runs without the GIL so replication chunks can share threads.
"""

from libc.math cimport exp, log, log1p

import numpy as np

from .errors import PosteriorUnderflowError


def restricted_log_e_batch(
    counts_a,
    counts_b,
    int n_a,
    int n_b,
    theta_a_grid,
    theta_b_grid,
    prior_weights,
    int divergence_code,
    double delta,
):
    counts_a = np.ascontiguousarray(counts_a, dtype=np.int64)
    counts_b = np.ascontiguousarray(counts_b, dtype=np.int64)
    if counts_a.ndim != 2 or counts_b.shape != counts_a.shape:
        raise ValueError("count matrices must be 2-d with equal shape")
    if counts_a.size and (
        counts_a.min() < 0
        or counts_a.max() > n_a
        or counts_b.min() < 0
        or counts_b.max() > n_b
    ):
        raise ValueError("block counts outside the design range")

    cdef double[::1] ta = np.ascontiguousarray(theta_a_grid, dtype=np.float64)
    cdef double[::1] prior = np.ascontiguousarray(prior_weights, dtype=np.float64)
    tb = np.ascontiguousarray(theta_b_grid, dtype=np.float64)

    # (combo, grid) block likelihood table, combo index ka*(n_b+1)+kb
    ka_idx = np.arange(n_a + 1)
    kb_idx = np.arange(n_b + 1)
    ta_arr = np.asarray(ta)
    lik_np = (
        ta_arr[None, :] ** ka_idx[:, None]
        * (1.0 - ta_arr[None, :]) ** (n_a - ka_idx[:, None])
    )[:, None, :] * (
        tb[None, :] ** kb_idx[:, None]
        * (1.0 - tb[None, :]) ** (n_b - kb_idx[:, None])
    )[None, :, :]
    lik_np = np.ascontiguousarray(
        lik_np.reshape((n_a + 1) * (n_b + 1), -1), dtype=np.float64
    )

    cdef double[:, ::1] lik = lik_np
    cdef long long[:, ::1] ca = counts_a
    cdef long long[:, ::1] cb = counts_b
    cdef Py_ssize_t reps = ca.shape[0]
    cdef Py_ssize_t m = ca.shape[1]
    cdef Py_ssize_t grid = ta.shape[0]

    out_np = np.empty((reps, m), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    work_np = np.empty(grid, dtype=np.float64)
    cdef double[::1] w = work_np

    cdef Py_ssize_t r, t, i
    cdef long long ka, kb, k
    cdef int n = n_a + n_b
    cdef long long combo_stride = n_b + 1
    cdef double total, dot, mu_a, mu_b, mu_0, log_e, factor, inv
    cdef bint dead = 0
    cdef Py_ssize_t dead_block = 0

    with nogil:
        for r in range(reps):
            for i in range(grid):
                w[i] = prior[i]
            log_e = 0.0
            for t in range(m):
                ka = ca[r, t]
                kb = cb[r, t]
                total = 0.0
                dot = 0.0
                for i in range(grid):
                    total += w[i]
                    dot += w[i] * ta[i]
                mu_a = dot / total
                if divergence_code == 0:
                    mu_b = mu_a + delta
                else:
                    mu_b = 1.0 / (1.0 + exp(-(log(mu_a / (1.0 - mu_a)) + delta)))
                mu_0 = (n_a * mu_a + n_b * mu_b) / n
                k = ka + kb
                factor = -(k * log(mu_0) + (n - k) * log1p(-mu_0))
                if ka > 0:
                    factor += ka * log(mu_a)
                if n_a - ka > 0:
                    factor += (n_a - ka) * log1p(-mu_a)
                if kb > 0:
                    factor += kb * log(mu_b)
                if n_b - kb > 0:
                    factor += (n_b - kb) * log1p(-mu_b)
                log_e += factor
                out[r, t] = log_e

                total = 0.0
                for i in range(grid):
                    w[i] *= lik[ka * combo_stride + kb, i]
                    total += w[i]
                if total <= 0.0:
                    dead = 1
                    dead_block = t
                    break
                inv = 1.0 / total
                for i in range(grid):
                    w[i] *= inv
            if dead:
                break
    if dead:
        raise PosteriorUnderflowError(
            f"grid posterior mass vanished at block {dead_block + 1}"
        )
    return out_np
