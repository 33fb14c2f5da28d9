"""Exception hierarchy.

Every error raised on purpose by the library derives from
:class:`UniformizerError`, so callers (the CLI in particular) can separate
computational failures from programming mistakes.
"""


class UniformizerError(Exception):
    """Base class for library errors."""


class DomainError(UniformizerError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class PoleError(UniformizerError, ZeroDivisionError):
    """Evaluation hit a pole (vanishing denominator or singular constant)."""


class ContourEscapeError(UniformizerError):
    """A contour sampler returned non-finite values."""


class DerivativeVanishingError(UniformizerError):
    """The first derivative vanishes where it is required to be nonzero."""


class BranchUndefinedError(UniformizerError):
    """A fractional power was requested without branch information."""


class BranchConflictError(UniformizerError):
    """Continuation of a logarithm along relations disagrees with itself."""


class InvalidGroupError(UniformizerError, ValueError):
    """Generators violate the invariants of a group presentation."""


class RelationError(InvalidGroupError):
    """The surface relation is not satisfied up to sign."""


class DegenerateParametersError(DomainError):
    """Trace parameters at or below the parabolic threshold."""


class NoRealSolutionError(DomainError):
    """The trace identity has no real solution for the given parameters."""


class InvalidWordError(UniformizerError, ValueError):
    """A word uses letters that are not generators of the group."""


class ElementCapError(UniformizerError, MemoryError):
    """Enumeration would exceed the configured element budget."""


class EmptyDomainError(UniformizerError):
    """A fundamental-domain grid retained no nodes."""


class NotHyperbolicError(UniformizerError, TypeError):
    """A length was requested for an element that is not hyperbolic."""


class NotSFactorError(UniformizerError, ValueError):
    """A Poincare series was requested with an unsuitable factor."""


class NonIntegerWeightError(UniformizerError, ValueError):
    """The operation is only defined for integer weights."""


class InstabilityError(UniformizerError, ValueError):
    """A surface type fails 2 - 2g - n < 0."""


class OutOfTopologicalRangeError(UniformizerError, ValueError):
    """Riemann-Roch was asked for a degree below 2g - 1."""


class InvalidPlanError(UniformizerError, ValueError):
    """A pinch plan breaks the child bookkeeping."""


class GroupMismatchError(UniformizerError, ValueError):
    """Two factors live on different groups."""


class PeriodDataError(UniformizerError, ValueError):
    """Period matrix is not symmetric or its imaginary part is not positive definite."""


class TruncationWarning(UserWarning):
    """Word-length shells did not decay over the last two lengths."""
