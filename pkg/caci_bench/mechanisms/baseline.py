"""Known-quality baselines: the regret reference for the learning mechanisms."""

from __future__ import annotations

import numpy as np

from ..auction import select_top_k
from ..population import ArrivalProcess, OfflinePool
from ..tracer import ExperimentTrace, TraceRecorder
from .common import exploit_fixed, forward_diagnostics, stream_open
from .config import MechanismConfig
from .state import BudgetLedger

__all__ = ['run_baseline_offline', 'run_baseline_online']


def run_baseline_offline(
    pool: OfflinePool,
    config: MechanismConfig,
    budget: float,
    rng: np.random.Generator,
) -> ExperimentTrace:
    """
    Rank once by mu_i / b_i, price the top K against the (K+1)-th ratio and repeat that
    set while the residual budget covers the payment sum.
    """
    config.check_pool(pool)
    ledger = BudgetLedger(budget)
    recorder = TraceRecorder('baseline_offline', budget, pool.fingerprint())
    source = pool.new_reward_source()

    outcome = select_top_k(pool.ids, pool.qualities, pool.bids, config.k, config.b_max)
    recorder.set_params(pivot_ratio=outcome.pivot_ratio, explore_budget=0.0)
    exploit_fixed(pool, outcome, ledger, recorder, source, rng, first_slot=1)

    forward_diagnostics(source, recorder)
    return recorder.finish(ledger.residual)


def run_baseline_online(
    arrivals: ArrivalProcess,
    config: MechanismConfig,
    budget: float,
    rng: np.random.Generator,
) -> ExperimentTrace:
    """
    Per slot: rank the available workers by mu_i / b_i and execute the priced top K only
    when the residual covers the payment sum; unaffordable slots are skipped.
    """
    ledger = BudgetLedger(budget)
    recorder = TraceRecorder('baseline_online', budget, arrivals.fingerprint())
    recorder.set_params(explore_budget=0.0)
    source = arrivals.new_reward_source()
    floor = config.k * config.b_min

    t, idle = 1, 0
    while stream_open(arrivals, t, ledger, floor, idle, recorder):
        pool = arrivals.slot(t)
        if len(pool) < config.k + 1:
            recorder.skip_slot(t, ledger.residual, 'skipped slots with fewer than K+1 workers')
            t, idle = t + 1, idle + 1
            continue
        config.check_pool(pool)

        outcome = select_top_k(pool.ids, pool.qualities, pool.bids, config.k, config.b_max)
        if not ledger.can_afford(outcome.total_payment):
            recorder.skip_slot(t, ledger.residual, 'skipped slots whose payment sum exceeds the residual budget')
            t, idle = t + 1, idle + 1
            continue

        rows = outcome.rows
        rewards = source.draw(pool.ids[rows], pool.qualities[rows], rng)
        residual = ledger.charge(outcome.total_payment)
        recorder.record_slot(
            'exploitation', t, pool.ids[rows], outcome.payments, rewards, pool.qualities[rows], residual
        )
        t, idle = t + 1, 0

    forward_diagnostics(source, recorder)
    return recorder.finish(ledger.residual)
