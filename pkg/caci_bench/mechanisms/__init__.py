"""Selection-and-payment mechanisms and their registry."""

from __future__ import annotations

from typing import Any, Callable

import numpy as np

from ..exceptions import ConfigError
from ..tracer import ExperimentTrace
from .baseline import run_baseline_offline, run_baseline_online
from .caci import (
    explore_offline,
    run_caci_offline,
    run_caci_online,
    run_cmab_individual,
    run_offline_bandit,
)
from .common import CubeIndex, pick_round_robin
from .config import MechanismConfig
from .epsilon_first import run_epsilon_first, run_epsilon_first_offline, run_epsilon_first_online
from .indices import explore_budget, explore_budget_for_cells, offline_indices, online_indices, ucb_offline, ucb_online
from .state import BanditState, BudgetLedger, affordable_slots

MechanismFn = Callable[[Any, MechanismConfig, float, np.random.Generator], ExperimentTrace]

MECHANISMS: dict[str, MechanismFn] = {
    'baseline_offline': run_baseline_offline,
    'baseline_online': run_baseline_online,
    'caci_offline': run_caci_offline,
    'caci_online': run_caci_online,
    'eps_first_offline': run_epsilon_first_offline,
    'eps_first_online': run_epsilon_first_online,
    'cmab_individual': run_cmab_individual,
}

# Config-level names per mode
MECHANISM_IDS: dict[str, dict[str, str]] = {
    'offline': {
        'baseline': 'baseline_offline',
        'caci': 'caci_offline',
        'eps_first': 'eps_first_offline',
        'cmab': 'cmab_individual',
    },
    'online': {
        'baseline': 'baseline_online',
        'caci': 'caci_online',
        'eps_first': 'eps_first_online',
    },
}


def mechanism_mode(mechanism_id: str) -> str:
    """'offline' or 'online' for a registered mechanism id."""
    if mechanism_id not in MECHANISMS:
        raise ConfigError('mechanism', f'unknown mechanism {mechanism_id!r}')
    return 'online' if mechanism_id.endswith('_online') else 'offline'


def baseline_for(mechanism_id: str) -> str:
    """The known-quality baseline a mechanism's regret is measured against."""
    return 'baseline_online' if mechanism_mode(mechanism_id) == 'online' else 'baseline_offline'


def resolve_mechanism(name: str, mode: str) -> str:
    """Map a config name ('caci', 'eps_first', ...) to its mechanism id for a mode."""
    try:
        return MECHANISM_IDS[mode][name]
    except KeyError:
        raise ConfigError('mechanisms', f'{name!r} is not available in {mode} mode') from None


def get_mechanism(mechanism_id: str) -> MechanismFn:
    mechanism_mode(mechanism_id)
    return MECHANISMS[mechanism_id]


__all__ = [
    'MECHANISMS',
    'MECHANISM_IDS',
    'MechanismFn',
    'MechanismConfig',
    'BanditState',
    'BudgetLedger',
    'CubeIndex',
    'affordable_slots',
    'baseline_for',
    'explore_budget',
    'explore_budget_for_cells',
    'explore_offline',
    'get_mechanism',
    'mechanism_mode',
    'offline_indices',
    'online_indices',
    'pick_round_robin',
    'resolve_mechanism',
    'run_baseline_offline',
    'run_baseline_online',
    'run_caci_offline',
    'run_caci_online',
    'run_cmab_individual',
    'run_epsilon_first',
    'run_epsilon_first_offline',
    'run_epsilon_first_online',
    'run_offline_bandit',
    'ucb_offline',
    'ucb_online',
]
