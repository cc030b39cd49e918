"""Exception hierarchy for the gaussvol package.

All errors raised by the library derive from :class:`GaussvolError` so that
callers (in particular the command line driver) can map failures onto exit
codes: configuration problems are :class:`ConfigurationError`, every runtime
numerical or domain failure derives from :class:`DomainError` or
:class:`NumericalError`.
"""

from __future__ import annotations

__all__ = [
    "GaussvolError",
    "ConfigurationError",
    "DomainError",
    "BoundsError",
    "DegenerateFitError",
    "NumericalError",
    "SingularMatrixError",
    "PhaseUnwrapError",
    "AdmissibilityWarning",
]


class AdmissibilityWarning(UserWarning):
    """A transform is evaluated outside its proven well-posedness region.

    The computation proceeds (the linear algebra may still be perfectly
    conditioned), but the result carries no affine-expansion guarantee.
    """


class GaussvolError(Exception):
    """Base class for every error raised by gaussvol."""


class ConfigurationError(GaussvolError):
    """A model, plan or run configuration is invalid.

    The message lists every violated constraint, one per line.
    """


class DomainError(GaussvolError):
    """An argument lies outside the mathematical domain of an operation."""


class BoundsError(DomainError):
    """A price violates the static no-arbitrage bounds for its contract."""


class DegenerateFitError(DomainError):
    """A regression problem is degenerate (e.g. coincident maturities)."""


class NumericalError(GaussvolError):
    """A numerical procedure failed to reach its accuracy contract."""


class SingularMatrixError(NumericalError):
    """A linear system is singular to working precision."""


class PhaseUnwrapError(NumericalError):
    """A phase sequence is sampled too coarsely to unwrap reliably."""
