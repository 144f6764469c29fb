"""Pure-numpy batch folds over replication x block count matrices.

These are the reference implementations of the simulation hot loops.
`evstream.kernels` swaps in the compiled twin of
:func:`restricted_log_e_batch` when the extension built; every function
here must stay semantically identical to that twin.

All folds take per-block success counts (replications x blocks) and
return the cumulative log e-value trajectory with the same shape.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit, gammaln, logit

from .errors import PosteriorUnderflowError

DIFFERENCE_CODE = 0
LOG_ODDS_CODE = 1


def _check_counts(counts: np.ndarray, n: int, label: str) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.int64)
    if counts.ndim != 2:
        raise ValueError(f"{label} must be 2-d (replications x blocks)")
    if counts.size and (counts.min() < 0 or counts.max() > n):
        raise ValueError(f"{label} entries must lie in 0..{n}")
    return counts


def _log_pmf_terms(counts: np.ndarray, n: int, theta) -> np.ndarray:
    """counts*log(theta) + (n-counts)*log(1-theta) elementwise."""
    with np.errstate(divide="ignore", invalid="ignore"):
        succ = np.where(counts > 0, counts * np.log(theta), 0.0)
        fail = np.where(n - counts > 0, (n - counts) * np.log1p(-theta), 0.0)
    return succ + fail


def point_log_e_batch(
    counts_a: np.ndarray,
    counts_b: np.ndarray,
    n_a: int,
    n_b: int,
    theta_a: float,
    theta_b: float,
) -> np.ndarray:
    """Fold for a fixed simple alternative (per-block log factors via LUT)."""
    counts_a = _check_counts(counts_a, n_a, "counts_a")
    counts_b = _check_counts(counts_b, n_b, "counts_b")
    n = n_a + n_b
    theta_0 = (n_a * theta_a + n_b * theta_b) / n
    ka = np.arange(n_a + 1)[:, None]
    kb = np.arange(n_b + 1)[None, :]
    lut = (
        _log_pmf_terms(ka, n_a, theta_a)
        + _log_pmf_terms(kb, n_b, theta_b)
        - _log_pmf_terms(ka + kb, n, theta_0)
    )
    log_factors = lut[counts_a, counts_b]
    return np.cumsum(log_factors, axis=1)


def beta_log_e_batch(
    counts_a: np.ndarray,
    counts_b: np.ndarray,
    n_a: int,
    n_b: int,
    alpha_a: float,
    beta_a: float,
    alpha_b: float,
    beta_b: float,
) -> np.ndarray:
    """Fold for the independent-beta learned alternative.

    Posterior means depend only on cumulative counts, so the whole fold
    vectorizes through exclusive prefix sums.
    """
    counts_a = _check_counts(counts_a, n_a, "counts_a")
    counts_b = _check_counts(counts_b, n_b, "counts_b")
    m = counts_a.shape[1]
    n = n_a + n_b

    def exclusive_cumsum(x):
        out = np.zeros_like(x)
        np.cumsum(x[:, :-1], axis=1, out=out[:, 1:])
        return out

    u_a = exclusive_cumsum(counts_a)
    u_b = exclusive_cumsum(counts_b)
    blocks_done = np.arange(m, dtype=np.int64)[None, :]
    mu_a = (u_a + alpha_a) / (blocks_done * n_a + alpha_a + beta_a)
    mu_b = (u_b + alpha_b) / (blocks_done * n_b + alpha_b + beta_b)
    mu_0 = (n_a * mu_a + n_b * mu_b) / n
    log_factors = (
        _log_pmf_terms(counts_a, n_a, mu_a)
        + _log_pmf_terms(counts_b, n_b, mu_b)
        - _log_pmf_terms(counts_a + counts_b, n, mu_0)
    )
    return np.cumsum(log_factors, axis=1)


def _combo_likelihood_table(
    n_a: int, n_b: int, theta_a: np.ndarray, theta_b: np.ndarray
) -> np.ndarray:
    """(combo, grid) table of block likelihoods per grid point."""
    ka = np.arange(n_a + 1)
    kb = np.arange(n_b + 1)
    lik_a = theta_a[None, :] ** ka[:, None] * (1.0 - theta_a[None, :]) ** (
        n_a - ka[:, None]
    )
    lik_b = theta_b[None, :] ** kb[:, None] * (1.0 - theta_b[None, :]) ** (
        n_b - kb[:, None]
    )
    return (lik_a[:, None, :] * lik_b[None, :, :]).reshape(
        (n_a + 1) * (n_b + 1), -1
    )


def restricted_log_e_batch(
    counts_a: np.ndarray,
    counts_b: np.ndarray,
    n_a: int,
    n_b: int,
    theta_a_grid: np.ndarray,
    theta_b_grid: np.ndarray,
    prior_weights: np.ndarray,
    divergence_code: int,
    delta: float,
) -> np.ndarray:
    """Fold for the grid-restricted learned alternative.

    Per block: score at the current posterior-mean pair (theta_b mapped
    through the divergence inverse), then reweight the grid by the block
    likelihood. Weights are renormalized every block, in linear space.
    """
    counts_a = _check_counts(counts_a, n_a, "counts_a")
    counts_b = _check_counts(counts_b, n_b, "counts_b")
    reps, m = counts_a.shape
    n = n_a + n_b
    theta_a_grid = np.asarray(theta_a_grid, dtype=float)
    theta_b_grid = np.asarray(theta_b_grid, dtype=float)
    lik = _combo_likelihood_table(n_a, n_b, theta_a_grid, theta_b_grid)

    weights = np.tile(np.asarray(prior_weights, dtype=float), (reps, 1))
    out = np.empty((reps, m), dtype=float)
    log_e = np.zeros(reps)
    for t in range(m):
        ka = counts_a[:, t]
        kb = counts_b[:, t]
        mu_a = weights @ theta_a_grid
        if divergence_code == DIFFERENCE_CODE:
            mu_b = mu_a + delta
        else:
            mu_b = expit(logit(mu_a) + delta)
        mu_0 = (n_a * mu_a + n_b * mu_b) / n
        log_e += (
            _log_pmf_terms(ka, n_a, mu_a)
            + _log_pmf_terms(kb, n_b, mu_b)
            - _log_pmf_terms(ka + kb, n, mu_0)
        )
        out[:, t] = log_e
        weights *= lik[ka * (n_b + 1) + kb]
        totals = weights.sum(axis=1)
        if np.any(totals <= 0.0):
            raise PosteriorUnderflowError(
                f"grid posterior mass vanished at block {t + 1}"
            )
        weights /= totals[:, None]
    return out


def fisher_curve_batch(
    counts_a: np.ndarray, counts_b: np.ndarray, n_a: int, n_b: int
) -> np.ndarray:
    """One-sided exact-test p-value on the cumulative table after each block.

    The direction tested is "group b has more events". Uses a log-gamma
    lookup table; the p at blocks with no events yet is 1.
    """
    counts_a = _check_counts(counts_a, n_a, "counts_a")
    counts_b = _check_counts(counts_b, n_b, "counts_b")
    reps, m = counts_a.shape
    cum_a = np.cumsum(counts_a, axis=1)
    cum_b = np.cumsum(counts_b, axis=1)
    lgam = gammaln(np.arange(m * (n_a + n_b) + 2, dtype=float) + 1.0)

    def log_choose(n, k):
        return lgam[n] - lgam[k] - lgam[n - k]

    out = np.empty((reps, m), dtype=float)
    for t in range(m):
        total = (t + 1) * (n_a + n_b)
        nb_tot = (t + 1) * n_b
        n1 = cum_a[:, t] + cum_b[:, t]
        lo = cum_b[:, t]
        hi = np.minimum(n1, nb_tot)
        width = int((hi - lo).max()) + 1
        ks = lo[:, None] + np.arange(width)[None, :]
        valid = ks <= hi[:, None]
        ks = np.where(valid, ks, lo[:, None])
        log_pmf = (
            log_choose(nb_tot, ks)
            + log_choose(total - nb_tot, n1[:, None] - ks)
            - log_choose(total, n1)[:, None]
        )
        out[:, t] = np.minimum(
            np.where(valid, np.exp(log_pmf), 0.0).sum(axis=1), 1.0
        )
    return out
