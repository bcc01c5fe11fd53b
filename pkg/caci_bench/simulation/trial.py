"""One seeded mechanism run."""

from __future__ import annotations

import numpy as np

from ..exceptions import ConfigError
from ..mechanisms import MechanismConfig, get_mechanism, mechanism_mode
from ..population import ArrivalProcess, OfflinePool, Population
from ..tracer import ExperimentTrace


def run_trial(
    mechanism_id: str,
    population: Population,
    config: MechanismConfig,
    budget: float,
    seed: int,
    config_hash: str | None = None,
    label: str | None = None,
) -> ExperimentTrace:
    """
    Run a registered mechanism with a fresh generator seeded by seed.

    The trace carries the seed and config hash so it can be regenerated.
    """
    mode = mechanism_mode(mechanism_id)
    if mode == 'offline' and not isinstance(population, OfflinePool):
        raise ConfigError('mode', f'{mechanism_id} runs on a fixed pool, got an arrival stream')
    if mode == 'online' and not isinstance(population, ArrivalProcess):
        raise ConfigError('mode', f'{mechanism_id} runs on an arrival stream, got a fixed pool')

    rng = np.random.default_rng(seed)
    trace = get_mechanism(mechanism_id)(population, config, budget, rng)
    trace.seed = seed
    trace.config_hash = config_hash
    trace.label = label
    return trace
