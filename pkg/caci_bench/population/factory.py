"""Build quality functions and populations from an experiment configuration."""

from __future__ import annotations

from typing import TYPE_CHECKING, Union

import numpy as np

from ..exceptions import ConfigError
from .arrivals import ArrivalProcess, RecordedArrivals, SyntheticArrivals
from .ingest import CsvSchema, ingest_worker_csv
from .quality import BumpField, ConstantQuality, QualityFunction, TableQuality, TrajectoryQuality
from .workers import OfflinePool, generate_offline_pool

if TYPE_CHECKING:
    from ..config import ExperimentConfig, QualitySpec

__all__ = ['Population', 'build_quality', 'build_population']

Population = Union[OfflinePool, ArrivalProcess]

# Keeps the field's stream apart from the worker stream that shares the seed
_FIELD_STREAM = 7919


def build_quality(spec: 'QualitySpec', dim: int, seed: int) -> QualityFunction:
    """Instantiate the configured quality function for dimension dim."""
    if spec.type == 'bump':
        rng = np.random.default_rng([seed, _FIELD_STREAM])
        return BumpField.random(dim, rng, spec.bumps, spec.width, spec.low, spec.high)
    if spec.type == 'trajectory':
        return TrajectoryQuality(spec.sigma)
    if spec.type == 'constant':
        return ConstantQuality(spec.value)
    table = TableQuality(spec.values)
    if table.table.ndim != dim:
        raise ConfigError('population.quality.values', f'table has {table.table.ndim} axes, dim is {dim}')
    return table


def build_population(
    config: 'ExperimentConfig',
    seed: int | None = None,
    n: int | None = None,
    dim: int | None = None,
) -> Population:
    """
    Materialize the population a run will use.

    n and dim override the configured worker count (per slot in on-line mode) and
    context dimension for workers and dimension sweeps.
    """
    spec = config.population
    seed = config.population_seed if seed is None else seed
    dim = spec.dim if dim is None else dim

    if spec.type == 'csv':
        assert spec.csv_path is not None
        loaded = ingest_worker_csv(
            spec.csv_path,
            CsvSchema(context_columns=spec.context_columns, truthful=spec.truthful),
        )
        if config.mode == 'offline' and isinstance(loaded, RecordedArrivals):
            raise ConfigError('population.csv_path', 'off-line mode needs a file without a slot column')
        if config.mode == 'online' and isinstance(loaded, OfflinePool):
            raise ConfigError('population.csv_path', 'on-line mode needs a slot column')
        return loaded

    quality_fn = build_quality(spec.quality, dim, seed)
    cost_range = (spec.cost_min, spec.cost_max)
    b_max = config.auction.b_max

    if config.mode == 'offline':
        return generate_offline_pool(
            spec.n if n is None else n,
            dim,
            cost_range,
            quality_fn,
            seed,
            strategic=spec.strategic_bids,
            b_max=b_max,
        )

    return SyntheticArrivals(
        spec.workers_per_slot if n is None else n,
        dim,
        cost_range,
        quality_fn,
        seed,
        strategic=spec.strategic_bids,
        b_max=b_max,
        repeat_ids=spec.repeat_ids,
        pool_size=spec.pool_size,
        horizon=config.horizon,
    )
