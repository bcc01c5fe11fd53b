"""Context-aware mechanisms: learn hypercube qualities, then auction on UCB indices."""

from __future__ import annotations

import numpy as np

from ..auction import select_top_k
from ..context_space import locate_many
from ..population import ArrivalProcess, OfflinePool, RewardSource
from ..tracer import ExperimentTrace, TraceRecorder
from .common import CubeIndex, exploit_fixed, explore_slots, forward_diagnostics, stream_open
from .config import MechanismConfig
from .indices import explore_budget_for_cells, offline_indices, online_indices
from .state import BanditState, BudgetLedger, affordable_slots

__all__ = [
    'run_caci_offline',
    'run_caci_online',
    'run_cmab_individual',
    'run_offline_bandit',
    'explore_offline',
]


def explore_offline(
    pool: OfflinePool,
    cubes: np.ndarray,
    cells: int,
    config: MechanismConfig,
    budget: float,
    rng: np.random.Generator,
    ledger: BudgetLedger,
    recorder: TraceRecorder,
    source: RewardSource | None = None,
) -> tuple[BanditState, float, int]:
    """
    Exploration phase of the off-line mechanism.

    Spends floor(B# / (K b_max)) slots picking K cubes round-robin, one random worker per
    cube at b_max each. Returns the learned state, B# and the number of slots run.
    """
    state = BanditState(cells)
    per_slot = config.k * config.b_max
    if budget > 1:
        b_sharp = explore_budget_for_cells(budget, config.b_max, config.mu_max, cells)
        slots = affordable_slots(b_sharp, per_slot)
    else:
        recorder.diagnostic('budget <= 1 leaves the exploration formula undefined; exploration skipped')
        b_sharp, slots = 0.0, 0

    own_source = source is None
    source = source or pool.new_reward_source()
    rows, rewards = explore_slots(
        pool, CubeIndex(cubes, cells), slots, config.k, config.b_max, ledger, recorder, source, rng
    )
    state.update(cubes[rows], rewards)
    if own_source:
        forward_diagnostics(source, recorder)
    return state, b_sharp, slots


def run_offline_bandit(
    pool: OfflinePool,
    config: MechanismConfig,
    budget: float,
    rng: np.random.Generator,
    mechanism: str,
    cubes: np.ndarray,
    cells: int,
    **params: object,
) -> ExperimentTrace:
    """
    Explore the arms (cubes[row] is the arm of each worker), then freeze one UCB-ranked,
    second-price-paid set and repeat it while the residual covers its payments.
    """
    config.check_pool(pool)
    ledger = BudgetLedger(budget)
    recorder = TraceRecorder(mechanism, budget, pool.fingerprint())
    source = pool.new_reward_source()

    state, b_sharp, slots = explore_offline(
        pool, cubes, cells, config, budget, rng, ledger, recorder, source
    )
    recorder.set_params(cells=cells, explore_budget=b_sharp, explore_slots=slots, **params)

    scores = offline_indices(state, budget)[cubes]
    if np.isinf(scores).any():
        recorder.diagnostic('workers in never-explored cubes carry an infinite index')
    outcome = select_top_k(pool.ids, scores, pool.bids, config.k, config.b_max)
    exploit_fixed(pool, outcome, ledger, recorder, source, rng, first_slot=slots + 1)

    forward_diagnostics(source, recorder)
    return recorder.finish(ledger.residual)


def run_caci_offline(
    pool: OfflinePool,
    config: MechanismConfig,
    budget: float,
    rng: np.random.Generator,
) -> ExperimentTrace:
    """Off-line CACI on the d^M grid derived from the budget (or the configured d)."""
    grid = config.grid_for(budget, pool.dim)
    cubes = locate_many(pool.contexts, grid)
    return run_offline_bandit(
        pool, config, budget, rng, 'caci_offline', cubes, grid.cell_count,
        d=grid.granularity, dim=grid.dim,
    )


def run_cmab_individual(
    pool: OfflinePool,
    config: MechanismConfig,
    budget: float,
    rng: np.random.Generator,
) -> ExperimentTrace:
    """Per-worker combinatorial bandit: every worker is its own arm."""
    n = len(pool)
    return run_offline_bandit(
        pool, config, budget, rng, 'cmab_individual', np.arange(n, dtype=np.int64), n,
        d=n, dim=1,
    )


def run_caci_online(
    arrivals: ArrivalProcess,
    config: MechanismConfig,
    budget: float,
    rng: np.random.Generator,
) -> ExperimentTrace:
    """
    On-line CACI.

    Slot 1 pays b_max for one random worker per occupied cube (while the residual covers
    b_max). From slot 2 on, while the residual covers K b_max, workers are ranked by
    their cube's UCB index over their bid, the top K are paid against the (K+1)-th ratio
    and their rewards update the cube statistics.
    """
    grid = config.grid_for(budget, arrivals.dim)
    cells = grid.cell_count
    state = BanditState(cells)
    ledger = BudgetLedger(budget)
    recorder = TraceRecorder('caci_online', budget, arrivals.fingerprint())
    recorder.set_params(d=grid.granularity, dim=grid.dim, cells=cells, explore_budget=0.0)
    source = arrivals.new_reward_source()

    # Initialization slot
    first = arrivals.slot(1)
    config.check_pool(first, need_pivot=False)
    first_cubes = locate_many(first.contexts, grid)
    index = CubeIndex(first_cubes, cells)
    rows: list[int] = []
    for cube in index.occupied:
        if ledger.residual < config.b_max * (len(rows) + 1):
            recorder.diagnostic('initialization stopped early: residual budget below b_max')
            break
        members = index.members(int(cube))
        rows.append(int(members[rng.integers(members.size)]))
    if index.occupied.size < cells:
        recorder.diagnostic('some cubes had no worker in the initialization slot')

    if rows:
        init_rows = np.asarray(rows, dtype=np.int64)
        rewards = source.draw(first.ids[init_rows], first.qualities[init_rows], rng)
        residual = ledger.charge(config.b_max * init_rows.size)
        state.update(first_cubes[init_rows], rewards)
        recorder.record_slot(
            'init', 1, first.ids[init_rows], np.full(init_rows.size, config.b_max),
            rewards, first.qualities[init_rows], residual,
        )
    else:
        recorder.skip_slot(1, ledger.residual, 'initialization selected nobody')
    recorder.set_params(init_selections=len(rows))

    floor = config.k * config.b_max
    t, idle = 2, 0
    while stream_open(arrivals, t, ledger, floor, idle, recorder):
        pool = arrivals.slot(t)
        if len(pool) < config.k + 1:
            recorder.skip_slot(t, ledger.residual, 'skipped slots with fewer than K+1 workers')
            t, idle = t + 1, idle + 1
            continue
        config.check_pool(pool)

        cubes = locate_many(pool.contexts, grid)
        scores = online_indices(state, t, config.k)[cubes]
        outcome = select_top_k(pool.ids, scores, pool.bids, config.k, config.b_max)
        selected = outcome.rows
        rewards = source.draw(pool.ids[selected], pool.qualities[selected], rng)
        residual = ledger.charge(outcome.total_payment)
        state.update(cubes[selected], rewards)
        recorder.record_slot(
            'exploitation', t, pool.ids[selected], outcome.payments, rewards,
            pool.qualities[selected], residual,
        )
        t, idle = t + 1, 0

    forward_diagnostics(source, recorder)
    return recorder.finish(ledger.residual)
