"""Steklov spectra of hypersurfaces of revolution with two unit-sphere boundaries."""

from .errors import (
    BracketError,
    DomainError,
    IllConditionedError,
    NumericalError,
    ResolutionError,
    ResourceError,
    SteklovError,
    ZeroTraceError,
)

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "DomainError",
    "IllConditionedError",
    "NumericalError",
    "ResolutionError",
    "ResourceError",
    "SteklovError",
    "ZeroTraceError",
]
