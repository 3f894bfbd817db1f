"""Exception hierarchy.

Validation problems derive from :class:`DomainError` (a ``ValueError``);
numerical breakdowns derive from :class:`NumericalError` (an
``ArithmeticError``).  The CLI maps the two families to distinct exit codes.
"""


class SteklovError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SteklovError, ValueError):
    """An argument lies outside the domain of the operation."""


class IllConditionedError(DomainError):
    """Input is formally valid but too close to a singular configuration."""


class NumericalError(SteklovError, ArithmeticError):
    """A numerical procedure failed to deliver a trustworthy result."""


class BracketError(NumericalError):
    """A root bracket did not contain a sign change."""


class ResolutionError(NumericalError):
    """The configured discretization cannot resolve the requested quantity."""


class ResourceError(NumericalError):
    """A configured size limit (mode cutoff, grid size) was exceeded."""


class ZeroTraceError(NumericalError):
    """A Rayleigh quotient was requested for a function with zero boundary trace."""
