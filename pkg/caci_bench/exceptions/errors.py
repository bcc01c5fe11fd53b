"""Error hierarchy shared by every caci_bench component."""

from __future__ import annotations


class CaciBenchError(Exception):
    """Base class for all caci_bench errors."""


class InvalidParameterError(CaciBenchError, ValueError):
    """A numeric parameter is out of range or two shapes disagree."""


class BudgetTooSmallError(InvalidParameterError):
    """The exploration-budget formula needs ln B > 0."""

    def __init__(self, budget: float) -> None:
        super().__init__(f'budget too small for exploration formula (B={budget!r}, need B > 1)')
        self.budget = budget


class InsufficientCompetitionError(CaciBenchError):
    """Fewer than K+1 workers, so no pivot ratio exists for pricing."""

    def __init__(self, available: int, k: int) -> None:
        super().__init__(f'insufficient competition: {available} workers for K={k} (need K+1)')
        self.available = available
        self.k = k


class ConfigError(CaciBenchError):
    """Experiment configuration failed schema validation."""

    def __init__(self, path: str, message: str) -> None:
        super().__init__(f'{path}: {message}' if path else message)
        self.path = path
        self.reason = message


class DatasetError(CaciBenchError):
    """A worker CSV file could not be parsed or violates an invariant."""

    def __init__(self, message: str, line: int | None = None) -> None:
        super().__init__(f'line {line}: {message}' if line is not None else message)
        self.line = line


class PopulationMismatchError(CaciBenchError):
    """Two traces being compared were not produced on the same population and budget."""


class FitError(CaciBenchError):
    """Not enough usable points for a least-squares fit."""


class EnumerationTooLargeError(CaciBenchError):
    """Exhaustive subset enumeration exceeds the configured limit."""

    def __init__(self, count: int, limit: int) -> None:
        super().__init__(
            f'{count} K-subsets exceed the enumeration limit {limit}; pass allow_sampling=True'
        )
        self.count = count
        self.limit = limit
