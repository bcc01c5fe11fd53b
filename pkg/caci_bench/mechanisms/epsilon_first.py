"""Epsilon-first reference: spend a fixed fraction of the budget exploring, then exploit."""

from __future__ import annotations

from typing import Union

import numpy as np

from ..auction import select_top_k
from ..context_space import locate_many
from ..exceptions import ConfigError
from ..population import ArrivalProcess, OfflinePool
from ..tracer import ExperimentTrace, TraceRecorder
from .common import CubeIndex, exploit_fixed, forward_diagnostics, pick_round_robin, stream_open
from .config import MechanismConfig
from .state import BanditState, BudgetLedger, affordable_slots

__all__ = ['run_epsilon_first', 'run_epsilon_first_offline', 'run_epsilon_first_online']


def run_epsilon_first_offline(
    pool: OfflinePool,
    config: MechanismConfig,
    budget: float,
    rng: np.random.Generator,
) -> ExperimentTrace:
    """
    Explore individual workers: each slot pays b_max to K workers drawn uniformly without
    replacement, for floor(eps B / (K b_max)) slots. Then rank by empirical mean over bid
    (unexplored workers score 0) and repeat the second-price-paid top K.
    """
    config.check_pool(pool)
    n, k = len(pool), config.k
    ledger = BudgetLedger(budget)
    recorder = TraceRecorder('eps_first_offline', budget, pool.fingerprint())
    source = pool.new_reward_source()
    state = BanditState(n)

    explore_total = config.epsilon * ledger.initial
    slots = affordable_slots(explore_total, k * config.b_max) if explore_total > 0 else 0
    recorder.set_params(epsilon=config.epsilon, explore_budget=explore_total, explore_slots=slots)

    if slots:
        rows = np.stack([rng.choice(n, size=k, replace=False) for _ in range(slots)])
        flat = rows.ravel()
        rewards = source.draw(pool.ids[flat], pool.qualities[flat], rng).reshape(slots, k)
        residuals = ledger.charge_slots(k * config.b_max, slots)
        state.update(flat, rewards)
        recorder.record_slots(
            'exploration', 1, pool.ids[rows], np.full(k, config.b_max), rewards,
            pool.qualities[rows], residuals,
        )
    scores = state.means
    if state.total_pulls == 0:
        recorder.diagnostic('no worker explored; exploitation ranks by 1/bid')
        scores = np.ones(n)

    outcome = select_top_k(pool.ids, scores, pool.bids, k, config.b_max)
    exploit_fixed(pool, outcome, ledger, recorder, source, rng, first_slot=slots + 1)

    forward_diagnostics(source, recorder)
    return recorder.finish(ledger.residual)


def run_epsilon_first_online(
    arrivals: ArrivalProcess,
    config: MechanismConfig,
    budget: float,
    rng: np.random.Generator,
) -> ExperimentTrace:
    """
    Hypercube epsilon-first on a stream.

    While the exploration spend stays within eps B, each slot pays b_max to K workers
    picked round-robin over the occupied cubes. Afterwards every slot ranks its workers
    by their cube's empirical mean over bid and executes the second-price-paid top K when
    the residual covers it; exploitation does not update the estimates.
    """
    grid = config.grid_for(budget, arrivals.dim)
    cells = grid.cell_count
    k = config.k
    state = BanditState(cells)
    ledger = BudgetLedger(budget)
    recorder = TraceRecorder('eps_first_online', budget, arrivals.fingerprint())
    source = arrivals.new_reward_source()

    explore_total = config.epsilon * ledger.initial
    explore_cost = k * config.b_max
    explore_spent = 0.0
    explore_slots = 0
    floor = k * config.b_min
    cursor = 0

    t, idle = 1, 0
    while stream_open(arrivals, t, ledger, floor, idle, recorder):
        pool = arrivals.slot(t)
        if len(pool) < k + 1:
            recorder.skip_slot(t, ledger.residual, 'skipped slots with fewer than K+1 workers')
            t, idle = t + 1, idle + 1
            continue
        config.check_pool(pool)
        cubes = locate_many(pool.contexts, grid)

        if explore_spent + explore_cost <= explore_total and ledger.can_afford(explore_cost):
            rows, cursor = pick_round_robin(CubeIndex(cubes, cells), k, cursor, rng, recorder)
            rewards = source.draw(pool.ids[rows], pool.qualities[rows], rng)
            residual = ledger.charge(explore_cost)
            explore_spent += explore_cost
            explore_slots += 1
            state.update(cubes[rows], rewards)
            recorder.record_slot(
                'exploration', t, pool.ids[rows], np.full(k, config.b_max), rewards,
                pool.qualities[rows], residual,
            )
            t, idle = t + 1, 0
            continue

        if state.total_pulls == 0:
            recorder.diagnostic('no cube explored; exploitation ranks by 1/bid')
            scores = np.ones(len(pool))
        else:
            scores = state.means[cubes]
        outcome = select_top_k(pool.ids, scores, pool.bids, k, config.b_max)
        if not ledger.can_afford(outcome.total_payment):
            recorder.skip_slot(t, ledger.residual, 'skipped slots whose payment sum exceeds the residual budget')
            t, idle = t + 1, idle + 1
            continue
        selected = outcome.rows
        rewards = source.draw(pool.ids[selected], pool.qualities[selected], rng)
        residual = ledger.charge(outcome.total_payment)
        recorder.record_slot(
            'exploitation', t, pool.ids[selected], outcome.payments, rewards,
            pool.qualities[selected], residual,
        )
        t, idle = t + 1, 0

    recorder.set_params(
        epsilon=config.epsilon, d=grid.granularity, dim=grid.dim, cells=cells,
        explore_budget=explore_total, explore_slots=explore_slots,
    )
    forward_diagnostics(source, recorder)
    return recorder.finish(ledger.residual)


def run_epsilon_first(
    population: Union[OfflinePool, ArrivalProcess],
    config: MechanismConfig,
    budget: float,
    rng: np.random.Generator,
    mode: str = 'offline',
) -> ExperimentTrace:
    """Dispatch to the off-line (per-worker) or on-line (per-cube) variant."""
    if mode == 'offline':
        if not isinstance(population, OfflinePool):
            raise ConfigError('mode', 'off-line epsilon-first needs a fixed pool')
        return run_epsilon_first_offline(population, config, budget, rng)
    if mode == 'online':
        if not isinstance(population, ArrivalProcess):
            raise ConfigError('mode', 'on-line epsilon-first needs an arrival stream')
        return run_epsilon_first_online(population, config, budget, rng)
    raise ConfigError('mode', f'expected offline or online, got {mode!r}')
