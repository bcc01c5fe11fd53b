"""Mechanism parameters."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from ..context_space import HoelderParams, PartitionGrid, compute_granularity
from ..exceptions import InsufficientCompetitionError, InvalidParameterError

if TYPE_CHECKING:
    from ..config import ExperimentConfig
    from ..population import OfflinePool


@dataclass(frozen=True)
class MechanismConfig:
    """Auction and learning parameters shared by every mechanism."""

    k: int
    b_min: float
    b_max: float
    mu_max: float = 1.0
    hoelder: HoelderParams = field(default_factory=lambda: HoelderParams(L=1.0, alpha=1.0))
    granularity: int | None = None
    epsilon: float = 0.3

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidParameterError(f'K must be >= 1, got {self.k}')
        if not (0 < self.b_min <= self.b_max):
            raise InvalidParameterError(f'need 0 < b_min <= b_max, got {self.b_min!r}, {self.b_max!r}')
        if not (0 < self.mu_max <= 1):
            raise InvalidParameterError(f'mu_max must lie in (0, 1], got {self.mu_max!r}')
        if self.granularity is not None and self.granularity < 1:
            raise InvalidParameterError(f'granularity must be >= 1, got {self.granularity}')
        if not (0 < self.epsilon < 1):
            raise InvalidParameterError(f'epsilon must lie in (0, 1), got {self.epsilon!r}')

    @classmethod
    def from_experiment(cls, config: 'ExperimentConfig', epsilon: float | None = None) -> MechanismConfig:
        auction, quality = config.auction, config.population.quality
        return cls(
            k=auction.k,
            b_min=auction.b_min,
            b_max=auction.b_max,
            mu_max=auction.mu_max,
            hoelder=HoelderParams(L=quality.L, alpha=quality.alpha),
            granularity=auction.granularity,
            epsilon=epsilon if epsilon is not None else (config.epsilons[0] if config.epsilons else 0.3),
        )

    def with_epsilon(self, epsilon: float) -> MechanismConfig:
        return replace(self, epsilon=epsilon)

    def granularity_for(self, budget: float, dim: int) -> int:
        """The configured d, or the budget-derived one (budgets below 1 use d = 1)."""
        if self.granularity is not None:
            return self.granularity
        return compute_granularity(max(float(budget), 1.0), self.hoelder, dim)

    def grid_for(self, budget: float, dim: int) -> PartitionGrid:
        return PartitionGrid(dim=dim, granularity=self.granularity_for(budget, dim))

    def check_pool(self, pool: 'OfflinePool', need_pivot: bool = True) -> None:
        """Bids must respect [b_min, b_max]; a pivot needs K+1 workers."""
        if need_pivot and len(pool) < self.k + 1:
            raise InsufficientCompetitionError(len(pool), self.k)
        tolerance = 1e-12
        if np.any(pool.bids < self.b_min - tolerance) or np.any(pool.bids > self.b_max + tolerance):
            raise InvalidParameterError(f'bids must lie in [{self.b_min}, {self.b_max}]')
