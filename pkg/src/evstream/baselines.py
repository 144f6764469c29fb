"""Classical comparators: one-sided exact test and default contingency
Bayes factors, plus expectation scans showing the latter are not
e-variables.

The Bayes factors exist here only as counterexample baselines; they are
not offered as inference tools.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import ValidationError


@dataclass(frozen=True)
class ContingencyTable:
    """2x2 cell counts: rows are groups a/b, columns are outcome 1/0."""

    n_a1: int
    n_a0: int
    n_b1: int
    n_b0: int

    def __post_init__(self) -> None:
        for name in ("n_a1", "n_a0", "n_b1", "n_b0"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValidationError(f"{name} must be a nonnegative integer")

    @property
    def n_a(self) -> int:
        return self.n_a1 + self.n_a0

    @property
    def n_b(self) -> int:
        return self.n_b1 + self.n_b0

    @property
    def n_1(self) -> int:
        return self.n_a1 + self.n_b1

    @property
    def n_0(self) -> int:
        return self.n_a0 + self.n_b0

    @property
    def n(self) -> int:
        return self.n_a + self.n_b

    def swapped(self) -> "ContingencyTable":
        return ContingencyTable(self.n_b1, self.n_b0, self.n_a1, self.n_a0)


def _log_choose(n, k):
    return gammaln(n + 1.0) - gammaln(k + 1.0) - gammaln(n - k + 1.0)


def fisher_exact_one_sided(table: ContingencyTable) -> float:
    """Hypergeometric tail probability that group b has at least as many
    events, with all margins fixed.

    By convention the p-value is 1 when no events were observed at all.
    """
    if table.n_1 == 0:
        return 1.0
    lo = table.n_b1
    hi = min(table.n_1, table.n_b)
    ks = np.arange(lo, hi + 1)
    log_pmf = (
        _log_choose(table.n_b, ks)
        + _log_choose(table.n_a, table.n_1 - ks)
        - _log_choose(table.n, table.n_1)
    )
    return float(min(np.exp(log_pmf).sum(), 1.0))


def gd_bf_poisson(table: ContingencyTable) -> float:
    """Default Bayes factor under the Poisson sampling scheme."""
    n, n_1, n_0 = table.n, table.n_1, table.n_0
    log_bf = (
        math.log(8.0)
        + math.log(n + 1.0)
        + math.log(n_1 + 1.0)
        - math.log(n + 4.0)
        - math.log(n + 2.0)
    )
    log_bf += (
        gammaln(table.n_a1 + 1.0)
        + gammaln(table.n_b1 + 1.0)
        + gammaln(table.n_a0 + 1.0)
        + gammaln(table.n_b0 + 1.0)
        + gammaln(n + 1.0)
        - gammaln(n_1 + 2.0)
        - gammaln(n_0 + 1.0)
        - gammaln(table.n_a + 1.0)
        - gammaln(table.n_b + 1.0)
    )
    return float(math.exp(log_bf))


def gd_bf_indep_multinomial(table: ContingencyTable) -> float:
    """Default Bayes factor with both group sizes fixed by design."""
    log_bf = (
        _log_choose(table.n, table.n_1)
        - _log_choose(table.n_a, table.n_a1)
        - _log_choose(table.n_b, table.n_b1)
        + math.log(table.n + 1.0)
        - math.log(table.n_a + 1.0)
        - math.log(table.n_b + 1.0)
    )
    return float(np.exp(log_bf))


@dataclass(frozen=True)
class ExpectationCheck:
    """Null expectation of a table statistic, with truncation error bound
    where the summation is truncated (None when the sum is exact)."""

    value: float
    remainder_bound: Optional[float]


def gd_expectation_check(
    scheme: str,
    *,
    rates: "float | tuple[float, float, float, float] | None" = None,
    truncation: int = 50,
    theta: "float | None" = None,
    n_a: "int | None" = None,
    n_b: "int | None" = None,
    statistic: "Callable[[ContingencyTable], float] | None" = None,
) -> ExpectationCheck:
    """Expected value of a Bayes factor (or custom statistic) under the null.

    ``poisson``: all four cells independent Poisson; the sum is truncated
    at ``truncation`` per cell and a crude-but-valid tail bound
    ``8 * exp(L) * P(Poisson(2L) > truncation)`` (L the summed rate) is
    reported alongside.

    ``indep_multinomial``: both group sizes fixed, shared success rate
    ``theta``; the sum is finite and exact.
    """
    if scheme == "poisson":
        if truncation < 1:
            raise ValidationError("truncation must be >= 1")
        if rates is None:
            raise ValidationError("poisson scheme needs rates")
        lam = (
            (float(rates),) * 4
            if isinstance(rates, (int, float))
            else tuple(float(r) for r in rates)
        )
        if len(lam) != 4 or any(r <= 0 for r in lam):
            raise ValidationError("need four positive cell rates")
        counts = np.arange(truncation + 1)
        log_pmfs = [poisson.logpmf(counts, r) for r in lam]
        if statistic is not None:
            total = 0.0
            for a1 in counts:
                for b1 in counts:
                    for a0 in counts:
                        for b0 in counts:
                            log_p = (
                                log_pmfs[0][a1]
                                + log_pmfs[1][b1]
                                + log_pmfs[2][a0]
                                + log_pmfs[3][b0]
                            )
                            total += math.exp(log_p) * statistic(
                                ContingencyTable(int(a1), int(a0), int(b1), int(b0))
                            )
            value = total
        else:
            a1 = counts[:, None, None, None]
            b1 = counts[None, :, None, None]
            a0 = counts[None, None, :, None]
            b0 = counts[None, None, None, :]
            n_1 = a1 + b1
            n_0 = a0 + b0
            na = a1 + a0
            nb = b1 + b0
            n = n_1 + n_0
            log_bf = (
                math.log(8.0)
                + np.log(n + 1.0)
                + np.log(n_1 + 1.0)
                - np.log(n + 4.0)
                - np.log(n + 2.0)
                + gammaln(a1 + 1.0)
                + gammaln(b1 + 1.0)
                + gammaln(a0 + 1.0)
                + gammaln(b0 + 1.0)
                + gammaln(n + 1.0)
                - gammaln(n_1 + 2.0)
                - gammaln(n_0 + 1.0)
                - gammaln(na + 1.0)
                - gammaln(nb + 1.0)
            )
            log_p = (
                log_pmfs[0][:, None, None, None]
                + log_pmfs[1][None, :, None, None]
                + log_pmfs[2][None, None, :, None]
                + log_pmfs[3][None, None, None, :]
            )
            value = float(np.exp(log_p + log_bf).sum())
        lam_total = sum(lam)
        remainder = float(
            8.0 * math.exp(lam_total) * poisson.sf(truncation, 2.0 * lam_total)
        )
        return ExpectationCheck(value=value, remainder_bound=remainder)

    if scheme == "indep_multinomial":
        if theta is None or n_a is None or n_b is None:
            raise ValidationError(
                "indep_multinomial scheme needs theta, n_a and n_b"
            )
        if not (0.0 < theta < 1.0):
            raise ValidationError("theta must lie in (0, 1)")
        if statistic is None:
            statistic = gd_bf_indep_multinomial
        ka = np.arange(n_a + 1)
        kb = np.arange(n_b + 1)
        log_pmf_a = (
            _log_choose(n_a, ka)
            + ka * math.log(theta)
            + (n_a - ka) * math.log1p(-theta)
        )
        log_pmf_b = (
            _log_choose(n_b, kb)
            + kb * math.log(theta)
            + (n_b - kb) * math.log1p(-theta)
        )
        total = 0.0
        for i in ka:
            for j in kb:
                table = ContingencyTable(
                    int(i), int(n_a - i), int(j), int(n_b - j)
                )
                total += math.exp(log_pmf_a[i] + log_pmf_b[j]) * statistic(table)
        return ExpectationCheck(value=total, remainder_bound=None)

    raise ValidationError(f"unknown scheme {scheme!r}")
