"""Anytime-valid two-sample tests for Bernoulli streams.

Evidence against "both streams share one rate" is accumulated as a test
martingale of block e-values, safe under optional stopping. Alternatives
may be fixed points, learned via independent beta priors, or learned on
a restricted effect-size boundary.
"""

from .core import (
    DEFAULT_GAMMA,
    AlternativePoint,
    BetaPriorConfig,
    Block,
    BlockDesign,
    Decision,
    StreamState,
    bayes_factor_identity_check,
    posterior_means,
    simple_block_e,
    simple_block_e_general,
)
from .errors import (
    ConfigurationError,
    DegenerateEvidenceError,
    DomainError,
    EvstreamError,
    PosteriorUnderflowError,
    UnsupportedDesignError,
    ValidationError,
)
from .process import (
    BayesBeta,
    BayesRestricted,
    EvidenceProcess,
    PointFromRate,
    SimplePoint,
    iter_observations,
    model_from_config,
)
from .restricted import (
    DEFAULT_GRID_PRECISION,
    Divergence,
    RestrictedPrior,
    build_grid,
    d_inverse,
    divergence_value,
    grid_posterior_means,
    grid_posterior_update,
    parse_restriction_config,
    point_alternative_from_rate,
    restriction_config,
)

__version__ = "0.1.0"

__all__ = [
    "AlternativePoint",
    "BayesBeta",
    "BayesRestricted",
    "BetaPriorConfig",
    "Block",
    "BlockDesign",
    "ConfigurationError",
    "DEFAULT_GAMMA",
    "DEFAULT_GRID_PRECISION",
    "Decision",
    "DegenerateEvidenceError",
    "Divergence",
    "DomainError",
    "EvidenceProcess",
    "EvstreamError",
    "PointFromRate",
    "PosteriorUnderflowError",
    "RestrictedPrior",
    "SimplePoint",
    "StreamState",
    "UnsupportedDesignError",
    "ValidationError",
    "bayes_factor_identity_check",
    "build_grid",
    "d_inverse",
    "divergence_value",
    "grid_posterior_means",
    "grid_posterior_update",
    "iter_observations",
    "model_from_config",
    "parse_restriction_config",
    "point_alternative_from_rate",
    "posterior_means",
    "restriction_config",
    "simple_block_e",
    "simple_block_e_general",
]
