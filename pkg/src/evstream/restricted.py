"""Priors restricted to a fixed effect-size boundary.

The alternative space is the set of rate pairs at exactly effect size
``delta`` under a divergence (difference of means or log odds ratio).
On that one-dimensional boundary the pair is determined by ``theta_a``,
so the prior is a discretized beta density over an equally spaced grid,
updated by exact reweighting as blocks arrive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.special import expit, logit
from scipy.stats import beta as beta_dist

from .core import DEFAULT_GAMMA, AlternativePoint, StreamState
from .errors import (
    ConfigurationError,
    DomainError,
    PosteriorUnderflowError,
    ValidationError,
)

#: 1,000 grid points; halving the step changes long-run evidence by far
#: less than the stability budget, at negligible cost.
DEFAULT_GRID_PRECISION = 0.001


class Divergence(str, Enum):
    DIFFERENCE = "difference"
    LOG_ODDS_RATIO = "log_odds_ratio"


_DIVERGENCE_ALIASES = {
    "difference": Divergence.DIFFERENCE,
    "log_odds_ratio": Divergence.LOG_ODDS_RATIO,
    "log-odds": Divergence.LOG_ODDS_RATIO,
    "log_odds": Divergence.LOG_ODDS_RATIO,
}


def parse_divergence(value: "str | Divergence") -> Divergence:
    if isinstance(value, Divergence):
        return value
    try:
        return _DIVERGENCE_ALIASES[value]
    except KeyError:
        raise ValidationError(f"unknown divergence {value!r}") from None


def divergence_value(
    divergence: "str | Divergence", theta_a: float, theta_b: float
) -> float:
    """Effect size of the pair under the divergence."""
    divergence = parse_divergence(divergence)
    if divergence is Divergence.DIFFERENCE:
        return theta_b - theta_a
    if not (0.0 < theta_a < 1.0 and 0.0 < theta_b < 1.0):
        raise DomainError("log odds ratio needs interior rates")
    return float(logit(theta_b) - logit(theta_a))


def d_inverse(
    divergence: "str | Divergence", delta: float, theta_a: float
) -> float:
    """The ``theta_b`` at effect size ``delta`` given ``theta_a``."""
    divergence = parse_divergence(divergence)
    if divergence is Divergence.DIFFERENCE:
        if not (0.0 <= theta_a <= 1.0):
            raise DomainError(f"theta_a={theta_a} outside [0, 1]")
        theta_b = theta_a + delta
        if not (0.0 <= theta_b <= 1.0):
            raise DomainError(
                f"theta_a={theta_a} infeasible for difference delta={delta}"
            )
        return theta_b
    if not (0.0 < theta_a < 1.0):
        raise DomainError(f"theta_a={theta_a} outside (0, 1) for log odds")
    return float(expit(logit(theta_a) + delta))


def point_alternative_from_rate(
    theta_a: float, divergence: "str | Divergence", delta: float
) -> AlternativePoint:
    """Simple alternative when the control rate is known."""
    return AlternativePoint(theta_a, d_inverse(divergence, delta, theta_a))


@dataclass(frozen=True, eq=False)
class RestrictedPrior:
    """Discretized prior (or posterior) over the effect boundary.

    ``weights[i]`` is the mass on the pair ``(theta_a[i], theta_b[i])``;
    all arrays share one length and are treated as immutable.
    """

    divergence: Divergence
    delta: float
    zeta: float
    grid_precision: float
    alpha: float
    beta: float
    rho: np.ndarray
    theta_a: np.ndarray
    theta_b: np.ndarray
    weights: np.ndarray

    def __post_init__(self) -> None:
        if self.weights.shape != self.theta_a.shape:
            raise ValidationError("weights and grid must have equal length")
        if np.any(self.weights < 0) or abs(self.weights.sum() - 1.0) > 1e-12:
            raise ValidationError("weights must be a probability vector")

    @property
    def size(self) -> int:
        return int(self.theta_a.size)


def build_grid(
    divergence: "str | Divergence",
    delta: float,
    grid_precision: float = DEFAULT_GRID_PRECISION,
    alpha: float = 1.0,
    beta: float = 1.0,
) -> RestrictedPrior:
    """Discretize the effect boundary and weight it by a beta density.

    The grid is ``rho_i = i*K`` for ``i = 1..1/K`` mapped onto feasible
    ``theta_a`` values. Candidates whose beta density is not finite
    (the ``rho = 1`` endpoint when ``beta < 1``) or whose mapped pair
    leaves (0, 1] are dropped before normalization.
    """
    divergence = parse_divergence(divergence)
    if delta == 0:
        raise ValidationError("delta must be nonzero")
    if not (alpha > 0 and beta > 0):
        raise ValidationError("beta hyperparameters must be positive")
    if not (0 < grid_precision < 1):
        raise ValidationError("grid precision must lie in (0, 1)")
    inv = 1.0 / grid_precision
    n_points = round(inv)
    if abs(inv - n_points) > 1e-9 * inv:
        raise ValidationError("1/grid_precision must be a positive integer")

    rho = np.arange(1, n_points + 1, dtype=float) * grid_precision
    rho[-1] = 1.0
    if divergence is Divergence.DIFFERENCE:
        zeta = abs(delta)
        if zeta >= 1.0:
            raise ConfigurationError("|delta| must be below 1 for difference")
        if delta > 0:
            theta_a = (1.0 - zeta) * rho
        else:
            # mirrored construction: theta_b carries the scaled grid
            theta_a = zeta + (1.0 - zeta) * rho
        theta_b = theta_a + delta
    else:
        zeta = 0.0
        theta_a = rho.copy()
        interior = (theta_a > 0.0) & (theta_a < 1.0)
        theta_b = np.full_like(theta_a, np.nan)
        theta_b[interior] = expit(logit(theta_a[interior]) + delta)

    log_density = beta_dist.logpdf(rho, alpha, beta)
    keep = (
        np.isfinite(log_density)
        & (theta_a > 0.0)
        & (theta_a <= 1.0)
        & (theta_b > 0.0)
        & (theta_b <= 1.0)
    )
    if divergence is Divergence.LOG_ODDS_RATIO:
        keep &= (theta_a < 1.0) & (theta_b < 1.0)
    if not keep.any():
        raise ConfigurationError(
            f"no feasible grid points for {divergence.value} delta={delta}"
        )

    log_density = log_density[keep]
    weights = np.exp(log_density - log_density.max())
    weights /= weights.sum()
    return RestrictedPrior(
        divergence=divergence,
        delta=delta,
        zeta=zeta,
        grid_precision=grid_precision,
        alpha=alpha,
        beta=beta,
        rho=rho[keep],
        theta_a=theta_a[keep],
        theta_b=theta_b[keep],
        weights=weights,
    )


def _log_likelihood(theta: np.ndarray, u: int, t: int) -> np.ndarray:
    """Vector of u*log(theta) + (t-u)*log(1-theta), boundary-safe."""
    with np.errstate(divide="ignore", invalid="ignore"):
        succ = np.where(u > 0, u * np.log(theta), 0.0)
        fail = np.where(t - u > 0, (t - u) * np.log1p(-theta), 0.0)
    return succ + fail


def grid_posterior_update(
    prior: RestrictedPrior, state: StreamState
) -> RestrictedPrior:
    """Reweight the grid by the Bernoulli likelihood of the counts.

    The counts are interpreted relative to whatever ``prior`` already
    encodes, so passing a base prior with cumulative counts and chaining
    per-block counts give the same posterior.
    """
    if state.j == 0 and state.t_a == 0 and state.t_b == 0:
        return prior
    with np.errstate(divide="ignore"):
        log_w = np.log(prior.weights)
    log_w = log_w + _log_likelihood(prior.theta_a, state.u_a, state.t_a)
    log_w = log_w + _log_likelihood(prior.theta_b, state.u_b, state.t_b)
    top = log_w.max()
    if not np.isfinite(top):
        raise PosteriorUnderflowError(
            "every grid point has zero posterior mass"
        )
    weights = np.exp(log_w - top)
    weights /= weights.sum()
    return replace(prior, weights=weights)


def grid_posterior_means(prior: RestrictedPrior) -> tuple[float, float]:
    """Mean ``theta_a`` under the grid weights, with ``theta_b`` mapped
    through the divergence inverse (not the weighted mean of ``theta_b``)."""
    theta_a_hat = float(prior.weights @ prior.theta_a)
    return theta_a_hat, d_inverse(prior.divergence, prior.delta, theta_a_hat)


def parse_restriction_config(
    config: dict,
) -> "RestrictedPrior | AlternativePoint":
    """Build a restriction from its JSON form.

    With ``control_rate`` present the restriction collapses to the single
    point ``(control_rate, d_inverse(delta, control_rate))``; otherwise a
    grid prior over the boundary is returned.
    """
    try:
        divergence = parse_divergence(config["divergence"])
        delta = float(config["delta"])
    except KeyError as missing:
        raise ValidationError(f"restriction config missing {missing}") from None
    if "control_rate" in config and config["control_rate"] is not None:
        return point_alternative_from_rate(
            float(config["control_rate"]), divergence, delta
        )
    return build_grid(
        divergence,
        delta,
        grid_precision=float(
            config.get("grid_precision", DEFAULT_GRID_PRECISION)
        ),
        alpha=float(config.get("alpha", DEFAULT_GAMMA)),
        beta=float(config.get("beta", DEFAULT_GAMMA)),
    )


def restriction_config(
    divergence: "str | Divergence",
    delta: float,
    grid_precision: float = DEFAULT_GRID_PRECISION,
    alpha: float = DEFAULT_GAMMA,
    beta: float = DEFAULT_GAMMA,
    control_rate: "float | None" = None,
) -> dict:
    """The JSON form accepted by :func:`parse_restriction_config`."""
    out = {
        "divergence": parse_divergence(divergence).value,
        "delta": delta,
        "grid_precision": grid_precision,
        "alpha": alpha,
        "beta": beta,
    }
    if control_rate is not None:
        out["control_rate"] = control_rate
    return out
