"""Exception types raised across the package."""


class PhaseHelfrichError(Exception):
    """Base class for all package errors."""


class DegenerateCurve(PhaseHelfrichError):
    pass


class SelfIntersection(PhaseHelfrichError):
    pass


class CurvatureBoundExceeded(PhaseHelfrichError):
    pass


class AmbiguousProjection(PhaseHelfrichError):
    """Two distinct nearest points at (numerically) equal distance."""


class OutOfBand(PhaseHelfrichError):
    """Query lies farther from the curve than the reach radius at its foot."""


class CurveTooClose(PhaseHelfrichError):
    """Contact line leaves less than the required margin to the domain boundary."""


class InsufficientStencil(PhaseHelfrichError):
    pass


class PhiNotZeroOnE(PhaseHelfrichError):
    pass


class CoverageFailure(PhaseHelfrichError):
    pass


class StepTooSmall(PhaseHelfrichError):
    pass


class NotConverged(PhaseHelfrichError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NaNEncountered(PhaseHelfrichError):
    pass


class ConstraintStall(PhaseHelfrichError):
    pass


class ScenarioError(PhaseHelfrichError):
    """Invalid scenario file; message carries the JSON path and line."""
