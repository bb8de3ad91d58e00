"""Exception types shared across the package."""


class MindlinkError(Exception):
    """Base class for every error raised by this package."""


class ParameterError(MindlinkError, ValueError):
    """An argument value, range, or shape is invalid."""


class FormatError(MindlinkError, ValueError):
    """A file or serialized payload is malformed."""


class ConsistencyError(MindlinkError, ValueError):
    """Inputs are individually valid but mutually inconsistent."""


class TrainingError(MindlinkError, ValueError):
    """Calibration data cannot be fitted (e.g. a single class)."""


class EncodingError(MindlinkError, ValueError):
    """A character cannot be represented in the frame payload."""


class SyncError(MindlinkError, RuntimeError):
    """No frame header could be located in a sample stream."""


class TruncationError(MindlinkError, RuntimeError):
    """A header was found but the frame payload is incomplete."""

    def __init__(self, message: str, bits_recovered=None):
        super().__init__(message)
        self.bits_recovered = list(bits_recovered) if bits_recovered else []


class ConfigurationError(MindlinkError, ValueError):
    """A link configuration that cannot carry data (levels not separable)."""


class ComputationError(MindlinkError, ArithmeticError):
    """A derived quantity is undefined for the given inputs."""
