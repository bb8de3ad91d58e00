"""mindlink: P300 speller + 2-bit coding-metasurface text link, simulated end to end.

The package covers the whole chain: synthetic EEG for a 40-button flashing
interface, P300 feature extraction and linear decoding with adaptive
stopping, ASCII framing, an amplitude-keyed metasurface link with
header-synchronized reception, and standalone pattern synthesis with
far-field verification.
"""

__version__ = "0.1.0"

from .errors import (
    ComputationError,
    ConfigurationError,
    ConsistencyError,
    EncodingError,
    FormatError,
    MindlinkError,
    ParameterError,
    SyncError,
    TrainingError,
    TruncationError,
)
from .session import SessionConfig, calibrate, e2e, spell

__all__ = [
    "__version__",
    "SessionConfig",
    "calibrate",
    "spell",
    "e2e",
    "MindlinkError",
    "ParameterError",
    "FormatError",
    "ConsistencyError",
    "TrainingError",
    "EncodingError",
    "SyncError",
    "TruncationError",
    "ConfigurationError",
    "ComputationError",
]
