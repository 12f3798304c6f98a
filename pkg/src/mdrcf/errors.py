class TrackingError(Exception):
    """Base class for errors raised by this package."""


class InvalidParameterError(TrackingError, ValueError):
    pass


class DimensionError(TrackingError, ValueError):
    pass


class DegenerateTrainingError(TrackingError, ArithmeticError):
    pass


class OutOfFrameError(TrackingError, ValueError):
    pass


class ColorspaceError(TrackingError, ValueError):
    pass


class NoSecondaryPeakError(TrackingError):
    pass


class SequenceFormatError(TrackingError, ValueError):
    pass
