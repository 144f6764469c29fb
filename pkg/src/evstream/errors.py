"""Exception hierarchy shared across the package."""


class EvstreamError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(EvstreamError, ValueError):
    """Invalid argument or configuration value."""


class DegenerateEvidenceError(EvstreamError):
    """Both numerator and denominator of a block likelihood ratio are zero.

    Happens only for point alternatives on the boundary of [0,1] whose
    induced null also sits on the boundary and the observed block
    contradicts both. There is no principled limit, so we refuse to guess.
    """


class DomainError(EvstreamError, ValueError):
    """Parameter outside the valid domain of a divergence inverse."""


class ConfigurationError(EvstreamError, ValueError):
    """A grid or model configuration admits no feasible points."""


class UnsupportedDesignError(EvstreamError, ValueError):
    """Operation only defined for a restricted family of block designs."""


class PosteriorUnderflowError(EvstreamError, RuntimeError):
    """Every grid point received zero posterior mass."""
