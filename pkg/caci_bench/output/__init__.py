"""Output files."""

from .writer import (
    FAILURES_FILE,
    PROBE_FILE,
    RESULTS_FILE,
    SUMMARY_FILE,
    ResultWriter,
    trace_file_name,
)

__all__ = [
    'ResultWriter',
    'trace_file_name',
    'RESULTS_FILE',
    'SUMMARY_FILE',
    'FAILURES_FILE',
    'PROBE_FILE',
]
