"""Exception taxonomy shared by all calibration modules."""


class CalibrationError(Exception):
    """Base class for every failure this package raises on purpose."""


class EmptyInput(CalibrationError):
    """An operation that needs at least one sample got none."""


class DegenerateInput(CalibrationError):
    """Input geometry does not span the required subspace (collinear, coplanar, ...)."""


class InsufficientInliers(CalibrationError):
    """The best consensus model has fewer inliers than the configured minimum."""


class LengthMismatch(CalibrationError):
    """Two point lists that must correspond element-wise have different lengths."""


class OrderMismatch(CalibrationError):
    """Measurement sets disagree on the shared touch-point count or ordering."""


class UnknownTool(CalibrationError):
    """A tool id was requested that the calibration does not contain."""


class AmbiguousAxis(CalibrationError):
    """The reference dot projects onto the frame origin, leaving the x-axis undefined."""


class InvalidDecomposition(CalibrationError):
    """Quadrature error decomposition asked for with total < component."""


class ParseError(CalibrationError):
    """A session, measurement, board, or calibration file could not be parsed."""
