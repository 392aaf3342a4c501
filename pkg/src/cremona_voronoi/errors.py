"""Exception hierarchy shared by every module.

Each error carries a short tag (the class name) so reports and the CLI can
name the failed condition without string matching.
"""

from __future__ import annotations


class CremonaError(ValueError):
    """Base class for all domain errors."""

    @property
    def tag(self) -> str:
        return type(self).__name__


# configuration
class SatelliteViolation(CremonaError):
    pass


class UnknownParent(CremonaError):
    pass


class UnknownPoint(CremonaError):
    pass


class IncidenceConflict(CremonaError):
    pass


class ExcessViolation(CremonaError):
    pass


# classes
class NonPositiveClass(CremonaError):
    pass


# maps
class AlignedSupport(CremonaError):
    pass


class AdherencePairViolation(CremonaError):
    pass


class NotPreConsistent(CremonaError):
    pass


class ShapeUnsupported(CremonaError):
    pass


class AlignedWithMaximal(CremonaError):
    pass


class ValidationFailure(CremonaError):
    pass


class StepUnavailable(CremonaError):
    pass


# cells
class NotInE(CremonaError):
    pass


class NotInVId(CremonaError):
    pass


class NotBoundaryClass(CremonaError):
    pass


class SupportNotContained(CremonaError):
    pass


class HypothesisViolated(CremonaError):
    pass


# reduce
class IterationCap(CremonaError):
    pass


# cli / io
class ParseError(CremonaError):
    pass


class SchemaError(CremonaError):
    pass
