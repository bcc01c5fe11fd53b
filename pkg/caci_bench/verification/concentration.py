"""Monte-Carlo check of the post-exploration UCB concentration band."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..context_space import locate_many
from ..exceptions import InvalidParameterError
from ..mechanisms import BudgetLedger, MechanismConfig, explore_offline, offline_indices
from ..population import OfflinePool
from ..tracer import TraceRecorder
from .bounds import cube_qualities


@dataclass(frozen=True)
class ConcentrationReport:
    """How often any explored cube's index left (mu_Q, mu_Q + width) after exploration."""

    trials: int
    violations: int
    bound: float
    width: float
    cells: int
    explore_budget: float

    @property
    def frequency(self) -> float:
        return self.violations / self.trials

    @property
    def allowed(self) -> float:
        """The bound plus three binomial standard deviations (at least 3 / trials)."""
        p = min(self.bound, 1.0)
        slack = 3.0 * math.sqrt(p * (1.0 - p) / self.trials)
        return p + max(slack, 3.0 / self.trials)

    @property
    def within_bound(self) -> bool:
        return self.frequency <= self.allowed

    def to_dict(self) -> dict[str, Any]:
        return {
            'trials': self.trials,
            'violations': self.violations,
            'frequency': self.frequency,
            'bound': self.bound,
            'allowed': self.allowed,
            'width': self.width,
            'cells': self.cells,
            'explore_budget': self.explore_budget,
        }


def check_ucb_concentration(
    pool: OfflinePool,
    config: MechanismConfig,
    budget: float,
    trials: int,
    seed: int = 0,
) -> ConcentrationReport:
    """
    Run the off-line exploration phase trials times and count the runs in which some
    explored cube violates 0 < u - mu_Q < 2 sqrt(d^M b_max ln B / B#).
    """
    if trials < 1:
        raise InvalidParameterError(f'trials must be >= 1, got {trials}')
    if budget <= 1:
        raise InvalidParameterError(f'budget must be > 1, got {budget!r}')

    grid = config.grid_for(budget, pool.dim)
    cells = grid.cell_count
    cubes = locate_many(pool.contexts, grid)
    mu_q = cube_qualities(pool, grid)

    violations = 0
    b_sharp = 0.0
    width = math.inf
    for trial in range(trials):
        rng = np.random.default_rng(seed + trial)
        recorder = TraceRecorder('ucb_concentration', budget, pool.fingerprint())
        state, b_sharp, _ = explore_offline(
            pool, cubes, cells, config, budget, rng, BudgetLedger(budget), recorder
        )
        width = 2.0 * math.sqrt(cells * config.b_max * math.log(budget) / b_sharp)
        explored = state.counts > 0
        gap = offline_indices(state, budget)[explored] - mu_q[explored]
        if np.any(gap <= 0) or np.any(gap >= width):
            violations += 1

    return ConcentrationReport(
        trials=trials,
        violations=violations,
        bound=2.0 * cells / budget ** 2,
        width=width,
        cells=cells,
        explore_budget=b_sharp,
    )


__all__ = ['ConcentrationReport', 'check_ucb_concentration']
