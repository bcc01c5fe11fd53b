"""Bid-sweep truthfulness probe."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
import pandas as pd

from ..exceptions import ConfigError, InvalidParameterError
from ..mechanisms import MechanismConfig
from ..population import OfflinePool, Population
from ..simulation import run_trial
from ..tracer import ExperimentTrace

# Float tolerance for exact economic comparisons
TOLERANCE = 1e-9

# How far into a stream to look for the probed worker
STREAM_SCAN_LIMIT = 10_000


@dataclass(frozen=True)
class TruthProbeResult:
    """Utility of one worker as its bid sweeps a grid, all other bids and seeds fixed."""

    worker_id: int
    true_cost: float
    bids: np.ndarray
    utilities: np.ndarray
    selected: np.ndarray
    truthful_utility: float
    critical_payment: float | None

    @property
    def max_gain(self) -> float:
        """Largest utility gain over bidding the true cost (<= 0 for a truthful mechanism)."""
        return float(self.utilities.max() - self.truthful_utility)

    def is_single_step(self, tolerance: float = TOLERANCE) -> bool:
        """Non-increasing in the bid, with at most one drop."""
        if self.utilities.size < 2:
            return True
        diffs = np.diff(self.utilities)
        return bool(np.all(diffs <= tolerance) and np.count_nonzero(diffs < -tolerance) <= 1)

    def to_frame(self) -> pd.DataFrame:
        """Rows of truthprobe.csv."""
        return pd.DataFrame({
            'bid': self.bids,
            'utility': self.utilities,
            'selected': self.selected.astype(int),
        })

    def to_dict(self) -> dict[str, Any]:
        return {
            'worker_id': self.worker_id,
            'true_cost': self.true_cost,
            'truthful_utility': self.truthful_utility,
            'critical_payment': self.critical_payment,
            'max_gain': self.max_gain,
            'single_step': self.is_single_step(),
        }


def parse_grid(spec: str) -> np.ndarray:
    """'lo:hi:n' to n evenly spaced bids (a single point when n is 1)."""
    parts = spec.split(':')
    if len(parts) != 3:
        raise ConfigError('probe.grid', f'expected lo:hi:n, got {spec!r}')
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError('probe.grid', f'expected lo:hi:n, got {spec!r}') from None
    if n < 1 or hi < lo:
        raise ConfigError('probe.grid', f'need n >= 1 and lo <= hi, got {spec!r}')
    return np.linspace(lo, hi, n) if n > 1 else np.asarray([lo])


def true_cost_of(population: Population, worker_id: int) -> float:
    """The probed worker's private cost, searching the stream for on-line populations."""
    if isinstance(population, OfflinePool):
        if not population.has_worker(worker_id):
            raise ConfigError('probe.worker', f'worker {worker_id} is not in the pool')
        return float(population.costs[population.row_of(worker_id)])

    horizon = population.horizon
    limit = STREAM_SCAN_LIMIT if horizon is None else min(horizon, STREAM_SCAN_LIMIT)
    for t in range(1, limit + 1):
        pool = population.slot(t)
        if pool.has_worker(worker_id):
            return float(pool.costs[pool.row_of(worker_id)])
    raise ConfigError('probe.worker', f'worker {worker_id} does not appear in the first {limit} slots')


def worker_outcome(trace: ExperimentTrace, population: Population, worker_id: int) -> tuple[float, bool]:
    """Summed utility of a worker over a run, and whether it ever won an auction slot."""
    events = trace.selections()
    mine = events[events['worker_id'] == worker_id]
    if mine.empty:
        return 0.0, False

    if isinstance(population, OfflinePool):
        cost = float(population.costs[population.row_of(worker_id)])
        costs = np.full(len(mine), cost)
    else:
        pools = (population.slot(int(t)) for t in mine['slot'])
        costs = np.asarray([float(p.costs[p.row_of(worker_id)]) for p in pools])
    utility = float((mine['payment'].to_numpy() - costs).sum())
    won = bool((mine['phase'] == 'exploitation').any())
    return utility, won


def probe_truthfulness(
    mechanism_id: str,
    population: Population,
    config: MechanismConfig,
    worker_id: int,
    bid_grid: Sequence[float] | np.ndarray,
    seed: int,
    budget: float,
) -> TruthProbeResult:
    """
    Rerun the mechanism once per grid bid with only worker_id's bid changed.

    Every run uses the same seed, so the bid is the only thing that differs. The
    truthful reference run bids the worker's true cost.
    """
    bids = np.asarray(bid_grid, dtype=float)
    if bids.size == 0:
        raise InvalidParameterError('bid grid must not be empty')
    if np.any(bids < config.b_min - TOLERANCE) or np.any(bids > config.b_max + TOLERANCE):
        raise ConfigError('probe.grid', f'bids must lie in [{config.b_min}, {config.b_max}]')

    true_cost = true_cost_of(population, worker_id)

    def run_at(bid: float) -> tuple[float, bool]:
        probed: Population = population.with_bid(worker_id, float(bid))
        trace = run_trial(mechanism_id, probed, config, budget, seed)
        return worker_outcome(trace, probed, worker_id)

    truthful_utility, _ = run_at(true_cost)
    outcomes = [run_at(b) for b in bids]
    utilities = np.asarray([u for u, _ in outcomes])
    selected = np.asarray([s for _, s in outcomes], dtype=bool)
    won_bids = bids[selected]

    return TruthProbeResult(
        worker_id=int(worker_id),
        true_cost=true_cost,
        bids=bids,
        utilities=utilities,
        selected=selected,
        truthful_utility=truthful_utility,
        critical_payment=float(won_bids.max()) if won_bids.size else None,
    )


__all__ = [
    'TOLERANCE',
    'TruthProbeResult',
    'parse_grid',
    'probe_truthfulness',
    'true_cost_of',
    'worker_outcome',
]
