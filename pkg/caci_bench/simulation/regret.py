"""Regret against the known-quality baseline."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from ..auction import select_top_k
from ..exceptions import PopulationMismatchError
from ..mechanisms import MechanismConfig, affordable_slots
from ..population import OfflinePool
from ..tracer import ExperimentTrace


@dataclass(frozen=True)
class RegretReport:
    """Expected and realized reward gap between a baseline run and a mechanism run."""

    mechanism: str
    budget: float
    baseline_reward: float
    mechanism_reward: float
    regret: float
    baseline_realized: int
    mechanism_realized: int
    regret_series: np.ndarray

    @property
    def realized_regret(self) -> int:
        return self.baseline_realized - self.mechanism_realized

    def to_dict(self) -> dict[str, Any]:
        return {
            'mechanism': self.mechanism,
            'budget': self.budget,
            'baseline_reward': self.baseline_reward,
            'mechanism_reward': self.mechanism_reward,
            'regret': self.regret,
            'realized_regret': self.realized_regret,
        }


def _cumulative_by_slot(trace: ExperimentTrace, length: int) -> np.ndarray:
    per_slot = np.zeros(length + 1)
    for block in trace.blocks:
        np.add.at(per_slot, block.slots, block.expected)
    return np.cumsum(per_slot)[1:]


def compute_regret(mech_trace: ExperimentTrace, baseline_trace: ExperimentTrace) -> RegretReport:
    """
    regret = baseline cumulative expected reward - mechanism cumulative expected reward.

    regret_series[t-1] is the same difference after slot t; a run that already stopped
    keeps its final total.
    """
    if mech_trace.population_fingerprint != baseline_trace.population_fingerprint:
        raise PopulationMismatchError(
            f'traces come from different populations '
            f'({mech_trace.population_fingerprint} vs {baseline_trace.population_fingerprint})'
        )
    if mech_trace.budget != baseline_trace.budget:
        raise PopulationMismatchError(
            f'traces use different budgets ({mech_trace.budget} vs {baseline_trace.budget})'
        )

    slots = [int(b.slots[-1]) for t in (mech_trace, baseline_trace) for b in t.blocks]
    length = max(slots, default=0)
    series = _cumulative_by_slot(baseline_trace, length) - _cumulative_by_slot(mech_trace, length)

    baseline_reward = baseline_trace.cumulative_reward_expected
    mechanism_reward = mech_trace.cumulative_reward_expected
    return RegretReport(
        mechanism=mech_trace.name,
        budget=mech_trace.budget,
        baseline_reward=baseline_reward,
        mechanism_reward=mechanism_reward,
        regret=baseline_reward - mechanism_reward,
        baseline_realized=baseline_trace.cumulative_reward_realized,
        mechanism_realized=mech_trace.cumulative_reward_realized,
        regret_series=series,
    )


def analytic_baseline_reward(pool: OfflinePool, config: MechanismConfig, budget: float) -> float:
    """Closed-form expected reward of the off-line baseline: floor(B / sum p) * sum mu."""
    config.check_pool(pool)
    outcome = select_top_k(pool.ids, pool.qualities, pool.bids, config.k, config.b_max)
    slots = affordable_slots(budget, outcome.total_payment)
    return slots * float(pool.qualities[outcome.rows].sum())
