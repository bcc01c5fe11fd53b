"""Individual rationality audit: no selected worker is paid below its true cost."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..population import OfflinePool, Population
from ..tracer import ExperimentTrace


@dataclass(frozen=True)
class RationalityViolation:
    slot: int
    worker_id: int
    payment: float
    cost: float

    def to_dict(self) -> dict[str, Any]:
        return {'slot': self.slot, 'worker_id': self.worker_id, 'payment': self.payment, 'cost': self.cost}


@dataclass
class RationalityReport:
    mechanism: str
    checked: int = 0
    violations: list[RationalityViolation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def audit_individual_rationality(
    trace: ExperimentTrace,
    population: Population,
    tolerance: float = 1e-12,
) -> RationalityReport:
    """Check payment >= cost for every selection event of the trace."""
    report = RationalityReport(mechanism=trace.name)
    events = trace.selections()
    if events.empty:
        return report

    if isinstance(population, OfflinePool):
        costs = population.costs[population.rows_of(events['worker_id'].to_numpy())]
    else:
        costs = np.empty(len(events))
        for t, rows in events.groupby('slot').indices.items():
            pool = population.slot(int(t))
            costs[rows] = pool.costs[pool.rows_of(events['worker_id'].to_numpy()[rows])]

    payments = events['payment'].to_numpy()
    report.checked = len(events)
    for i in np.flatnonzero(payments < costs - tolerance):
        report.violations.append(RationalityViolation(
            slot=int(events['slot'].iat[i]),
            worker_id=int(events['worker_id'].iat[i]),
            payment=float(payments[i]),
            cost=float(costs[i]),
        ))
    return report


__all__ = ['RationalityViolation', 'RationalityReport', 'audit_individual_rationality']
