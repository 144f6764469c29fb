"""Block e-variables and running-evidence state for two Bernoulli streams.

Data arrives as blocks of ``n_a`` group-a and ``n_b`` group-b binary
outcomes. Each completed block is scored with a likelihood ratio whose
denominator is the Bernoulli distribution at the group-size-weighted mix
of the alternative parameters; the running product of block scores is a
test martingale, so the evidence level stays valid under optional
stopping. All accumulation happens in natural-log space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from scipy.special import betaln

from .errors import (
    DegenerateEvidenceError,
    UnsupportedDesignError,
    ValidationError,
)

#: Symmetric beta hyperparameter recommended as the default for the
#: learned-alternative test with n_a = n_b = 1.
DEFAULT_GAMMA = 0.18

_NEG_INF = float("-inf")


@dataclass(frozen=True)
class BlockDesign:
    """Group sizes of one block: ``n_a`` a-outcomes and ``n_b`` b-outcomes."""

    n_a: int
    n_b: int

    def __post_init__(self) -> None:
        if not (isinstance(self.n_a, int) and isinstance(self.n_b, int)):
            raise ValidationError("block design sizes must be integers")
        if self.n_a < 1 or self.n_b < 1:
            raise ValidationError("block design sizes must be >= 1")

    @property
    def n(self) -> int:
        return self.n_a + self.n_b

    @property
    def kappa(self) -> float:
        """Group size ratio n_b / n_a."""
        return self.n_b / self.n_a


def _check_binary(values: Sequence[int], label: str) -> tuple[int, ...]:
    out = tuple(int(v) for v in values)
    if any(v not in (0, 1) for v in out):
        raise ValidationError(f"{label} entries must be 0 or 1")
    return out


@dataclass(frozen=True)
class Block:
    """One completed block of binary outcomes in each group."""

    ys_a: tuple[int, ...]
    ys_b: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ys_a", _check_binary(self.ys_a, "ys_a"))
        object.__setattr__(self, "ys_b", _check_binary(self.ys_b, "ys_b"))

    @property
    def k_a(self) -> int:
        return sum(self.ys_a)

    @property
    def k_b(self) -> int:
        return sum(self.ys_b)

    def check_design(self, design: BlockDesign) -> None:
        if len(self.ys_a) != design.n_a or len(self.ys_b) != design.n_b:
            raise ValidationError(
                f"block shape ({len(self.ys_a)},{len(self.ys_b)}) does not "
                f"match design ({design.n_a},{design.n_b})"
            )


@dataclass(frozen=True)
class AlternativePoint:
    """A simple alternative: success rates for the two groups."""

    theta_a: float
    theta_b: float

    def __post_init__(self) -> None:
        for name in ("theta_a", "theta_b"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"{name} must lie in [0, 1], got {v}")

    def null_point(self, design: BlockDesign) -> float:
        """Induced null rate: group-size-weighted mix of the two rates."""
        n = design.n
        return (design.n_a / n) * self.theta_a + (design.n_b / n) * self.theta_b


@dataclass(frozen=True)
class BetaPriorConfig:
    """Independent beta priors on the two group rates."""

    alpha_a: float
    beta_a: float
    alpha_b: float
    beta_b: float

    def __post_init__(self) -> None:
        for name in ("alpha_a", "beta_a", "alpha_b", "beta_b"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be strictly positive")

    @classmethod
    def symmetric(cls, gamma: float = DEFAULT_GAMMA) -> "BetaPriorConfig":
        return cls(gamma, gamma, gamma, gamma)


@dataclass(frozen=True)
class StreamState:
    """Success/trial counts over completed blocks, per group."""

    u_a: int = 0
    t_a: int = 0
    u_b: int = 0
    t_b: int = 0
    j: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.u_a <= self.t_a and 0 <= self.u_b <= self.t_b):
            raise ValidationError("success counts must lie in [0, trials]")
        if self.j < 0:
            raise ValidationError("completed-block count must be >= 0")

    def add_block(self, block: Block) -> "StreamState":
        return StreamState(
            u_a=self.u_a + block.k_a,
            t_a=self.t_a + len(block.ys_a),
            u_b=self.u_b + block.k_b,
            t_b=self.t_b + len(block.ys_b),
            j=self.j + 1,
        )


@dataclass(frozen=True)
class Decision:
    """Threshold decision against the running e-value.

    The comparison is performed in log space: ``reject`` is true iff
    ``log_e >= log(1/alpha)``, the sharp form of the threshold rule.
    """

    reject: bool
    threshold: float
    e_value: float


def log_bernoulli(k: int, n: int, theta: float) -> float:
    """log of theta^k (1-theta)^(n-k), with 0^0 := 1 at the boundary."""
    if theta == 0.0:
        return 0.0 if k == 0 else _NEG_INF
    if theta == 1.0:
        return 0.0 if k == n else _NEG_INF
    return k * math.log(theta) + (n - k) * math.log1p(-theta)


def log_simple_block_e(
    k_a: int, k_b: int, design: BlockDesign, alt: AlternativePoint
) -> float:
    """Log block e-value from per-group success counts.

    Returns ``-inf`` when the alternative puts zero probability on the
    block but the induced null does not; raises when both do.
    """
    theta_0 = alt.null_point(design)
    log_num = log_bernoulli(k_a, design.n_a, alt.theta_a) + log_bernoulli(
        k_b, design.n_b, alt.theta_b
    )
    log_den = log_bernoulli(k_a + k_b, design.n, theta_0)
    if log_den == _NEG_INF:
        # theta_0 on the boundary forces both alternative rates onto the
        # same boundary, so the numerator vanished on the same outcome.
        raise DegenerateEvidenceError(
            "block has zero probability under both the alternative "
            f"({alt.theta_a}, {alt.theta_b}) and its induced null {theta_0}"
        )
    if log_num == _NEG_INF:
        return _NEG_INF
    return log_num - log_den


def simple_block_e(
    block: Block, design: BlockDesign, alt: AlternativePoint
) -> float:
    """Block e-value for a simple alternative (counts are sufficient)."""
    block.check_design(design)
    return math.exp(log_simple_block_e(block.k_a, block.k_b, design, alt))


def _validate_pmf(q: Sequence[float], label: str) -> tuple[float, ...]:
    vals = tuple(float(v) for v in q)
    if any(v < 0 for v in vals):
        raise ValidationError(f"{label} has negative mass")
    if abs(sum(vals) - 1.0) > 1e-9:
        raise ValidationError(f"{label} does not sum to 1 (got {sum(vals)})")
    return vals


def simple_block_e_general(
    symbols_a: Sequence[int],
    symbols_b: Sequence[int],
    design: BlockDesign,
    q_a: Sequence[float],
    q_b: Sequence[float],
) -> float:
    """Block e-value for finite-alphabet outcomes.

    ``q_a`` and ``q_b`` are mass functions over a shared alphabet
    ``0..len(q)-1``. The per-outcome denominator is the group-size-weighted
    mixture ``(n_a/n) q_a(y) + (n_b/n) q_b(y)``.
    """
    q_a = _validate_pmf(q_a, "q_a")
    q_b = _validate_pmf(q_b, "q_b")
    if len(q_a) != len(q_b):
        raise ValidationError("q_a and q_b must share one alphabet")
    if len(symbols_a) != design.n_a or len(symbols_b) != design.n_b:
        raise ValidationError("block shape does not match design")
    alphabet = range(len(q_a))
    if any(s not in alphabet for s in symbols_a) or any(
        s not in alphabet for s in symbols_b
    ):
        raise ValidationError("block symbol outside the alphabet")

    w_a = design.n_a / design.n
    w_b = design.n_b / design.n
    log_e = 0.0
    for symbols, q in ((symbols_a, q_a), (symbols_b, q_b)):
        for y in symbols:
            num = q[y]
            den = w_a * q_a[y] + w_b * q_b[y]
            if den == 0.0:
                raise DegenerateEvidenceError(
                    f"symbol {y} has zero mass under both components"
                )
            if num == 0.0:
                return 0.0
            log_e += math.log(num) - math.log(den)
    return math.exp(log_e)


def posterior_means(
    prior: BetaPriorConfig, state: StreamState, design: BlockDesign
) -> tuple[float, float, float]:
    """Posterior-mean rates per group plus the induced null rate."""
    theta_a_hat = (state.u_a + prior.alpha_a) / (
        state.t_a + prior.alpha_a + prior.beta_a
    )
    theta_b_hat = (state.u_b + prior.alpha_b) / (
        state.t_b + prior.alpha_b + prior.beta_b
    )
    n = design.n
    theta_0_hat = (design.n_a / n) * theta_a_hat + (design.n_b / n) * theta_b_hat
    return theta_a_hat, theta_b_hat, theta_0_hat


def bayes_factor_identity_check(
    prior: BetaPriorConfig, blocks: Sequence[Block]
) -> tuple[float, float]:
    """Both sides of the telescoping numerator identity for 1/1 designs.

    Left: product over blocks of the two posterior-predictive masses.
    Right: product of the per-group beta-binomial marginal likelihoods.
    The caller asserts they agree; for designs other than n_a = n_b = 1
    the identity does not hold and we refuse to evaluate it.
    """
    design = BlockDesign(1, 1)
    state = StreamState()
    log_lhs = 0.0
    for block in blocks:
        if len(block.ys_a) != 1 or len(block.ys_b) != 1:
            raise UnsupportedDesignError(
                "telescoping identity requires n_a = n_b = 1 blocks"
            )
        theta_a_hat, theta_b_hat, _ = posterior_means(prior, state, design)
        log_lhs += log_bernoulli(block.k_a, 1, theta_a_hat)
        log_lhs += log_bernoulli(block.k_b, 1, theta_b_hat)
        state = state.add_block(block)

    def group_marginal(alpha: float, beta: float, u: int, t: int) -> float:
        return betaln(alpha + u, beta + t - u) - betaln(alpha, beta)

    log_rhs = group_marginal(
        prior.alpha_a, prior.beta_a, state.u_a, state.t_a
    ) + group_marginal(prior.alpha_b, prior.beta_b, state.u_b, state.t_b)
    return math.exp(log_lhs), math.exp(log_rhs)
