"""Error hierarchy and failure capture."""

from .errors import (
    BudgetTooSmallError,
    CaciBenchError,
    ConfigError,
    DatasetError,
    EnumerationTooLargeError,
    FitError,
    InsufficientCompetitionError,
    InvalidParameterError,
    PopulationMismatchError,
)
from .capture import FailureCapture, FailureCaptureBuilder, StackFrameInfo
from .handler import FailureHandler

__all__ = [
    'CaciBenchError',
    'InvalidParameterError',
    'BudgetTooSmallError',
    'InsufficientCompetitionError',
    'ConfigError',
    'DatasetError',
    'PopulationMismatchError',
    'FitError',
    'EnumerationTooLargeError',
    'FailureCapture',
    'FailureCaptureBuilder',
    'FailureHandler',
    'StackFrameInfo',
]
