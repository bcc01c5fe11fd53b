"""Population constants and the reported regret upper bounds."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.special import comb

from ..context_space import PartitionGrid, delta_bound, locate_many
from ..exceptions import EnumerationTooLargeError, InvalidParameterError
from ..mechanisms import MechanismConfig
from ..population import OfflinePool, Population

ENUMERATION_LIMIT = 10 ** 6
DEFAULT_SAMPLES = 200_000
# Arrival streams are summarized over this many leading slots
DEFAULT_SLOT_SAMPLE = 20

__all__ = [
    'ENUMERATION_LIMIT',
    'RegretBound',
    'RegretBoundParams',
    'compute_bound_constants',
    'cube_qualities',
    'min_sum_gap',
    'offline_regret_bound',
    'online_regret_bound',
]


@dataclass(frozen=True)
class RegretBoundParams:
    """Instance constants that enter the on-line regret bound."""

    delta_min: float
    nabla_max: float
    delta: float
    degenerate: bool = False
    approximate: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            'delta_min': self.delta_min,
            'nabla_max': self.nabla_max,
            'delta': self.delta,
            'degenerate': self.degenerate,
            'approximate': self.approximate,
        }


@dataclass(frozen=True)
class RegretBound:
    value: float
    confidence: float


def cube_qualities(pool: OfflinePool, grid: PartitionGrid) -> np.ndarray:
    """Mean true quality of the pool's workers per cube; NaN for empty cubes."""
    cubes = locate_many(pool.contexts, grid)
    counts = np.bincount(cubes, minlength=grid.cell_count).astype(float)
    sums = np.bincount(cubes, weights=pool.qualities, minlength=grid.cell_count)
    with np.errstate(divide='ignore', invalid='ignore'):
        return np.where(counts > 0, sums / counts, np.nan)


def _positive_gaps(values: np.ndarray) -> np.ndarray:
    ordered = np.sort(values)
    diffs = np.diff(ordered)
    tolerance = 1e-12 * max(1.0, float(np.abs(ordered).max(initial=0.0)))
    return diffs[diffs > tolerance]


def min_sum_gap(ratios: np.ndarray, k: int) -> float:
    """Smallest positive gap between two K-subset sums, by full enumeration; 0 when none exists."""
    n = len(ratios)
    count = int(comb(n, k, exact=True))
    rows = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations(range(n), k)),
        dtype=np.int64,
        count=count * k,
    ).reshape(count, k)
    gaps = _positive_gaps(ratios[rows].sum(axis=1))
    return float(gaps.min()) if gaps.size else 0.0


def _sampled_sum_gap(ratios: np.ndarray, k: int, samples: int, rng: np.random.Generator) -> float:
    n = len(ratios)
    rows = np.argsort(rng.random((samples, n)), axis=1)[:, :k]
    sampled = _positive_gaps(ratios[rows].sum(axis=1))
    # Exchanging one member for a non-member realizes every pairwise ratio difference
    swap = _positive_gaps(ratios)
    candidates = [g.min() for g in (sampled, swap) if g.size]
    return float(min(candidates)) if candidates else 0.0


def _pool_constants(
    pool: OfflinePool,
    grid: PartitionGrid,
    k: int,
    allow_sampling: bool,
    samples: int,
    rng: np.random.Generator,
) -> tuple[float, float, bool]:
    """(delta_min, nabla_max, sampled) for one set of simultaneously available workers."""
    n = len(pool)
    if k > n:
        raise InvalidParameterError(f'K = {k} exceeds the {n} available workers')
    mu_q = cube_qualities(pool, grid)
    occupied = mu_q[~np.isnan(mu_q)]
    nabla_max = float(occupied.max() - occupied.min()) if occupied.size else 0.0

    ratios = mu_q[locate_many(pool.contexts, grid)] / pool.bids
    count = int(comb(n, k, exact=True))
    if count <= ENUMERATION_LIMIT:
        return min_sum_gap(ratios, k), nabla_max, False
    if not allow_sampling:
        raise EnumerationTooLargeError(count, ENUMERATION_LIMIT)
    return _sampled_sum_gap(ratios, k, samples, rng), nabla_max, True


def compute_bound_constants(
    population: Population,
    grid: PartitionGrid,
    config: MechanismConfig,
    allow_sampling: bool = False,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    slot_sample: int = DEFAULT_SLOT_SAMPLE,
) -> RegretBoundParams:
    """
    Delta_min, nabla_max and delta for a pool or an arrival stream.

    Delta_min is enumerated exactly while C(N, K) <= 10^6. Larger instances raise
    EnumerationTooLargeError unless allow_sampling is set, in which case the estimate
    is flagged approximate. Streams take the worst case over their first slot_sample
    slots and are always approximate.
    """
    rng = np.random.default_rng(seed)
    delta = delta_bound(config.hoelder, grid)

    if isinstance(population, OfflinePool):
        delta_min, nabla_max, sampled = _pool_constants(
            population, grid, config.k, allow_sampling, samples, rng
        )
        return RegretBoundParams(
            delta_min=delta_min,
            nabla_max=nabla_max,
            delta=delta,
            degenerate=delta_min == 0.0,
            approximate=sampled,
        )

    horizon = population.horizon
    limit = slot_sample if horizon is None else min(horizon, slot_sample)
    gaps, spreads = [], []
    for pool in population.slots(limit):
        if len(pool) < config.k:
            continue
        gap, spread, _ = _pool_constants(pool, grid, config.k, allow_sampling, samples, rng)
        gaps.append(gap)
        spreads.append(spread)
    if not gaps:
        raise InvalidParameterError(f'no slot among the first {limit} has K = {config.k} workers')
    delta_min = min(gaps)
    return RegretBoundParams(
        delta_min=delta_min,
        nabla_max=max(spreads),
        delta=delta,
        degenerate=delta_min == 0.0,
        approximate=True,
    )


def _growth_exponent(alpha: float, dim: int) -> float:
    return (2 * alpha + dim) / (3 * alpha + dim)


def offline_regret_bound(
    budget: float,
    config: MechanismConfig,
    dim: int,
    granularity: int | None = None,
) -> RegretBound:
    """High-probability regret bound of the off-line context-aware mechanism."""
    if budget <= 1:
        raise InvalidParameterError(f'budget must be > 1, got {budget!r}')
    alpha, L = config.hoelder.alpha, config.hoelder.L
    d = granularity if granularity is not None else config.granularity_for(budget, dim)
    growth = budget ** _growth_exponent(alpha, dim)
    value = (
        3 * (2 ** dim * config.b_max * config.mu_max) ** (1 / 3) / config.b_min
        * growth * math.log(budget) ** (1 / 3)
        + 4 * L * dim ** (alpha / 2) / config.b_min * growth
        + 2 * config.k * config.mu_max
    )
    confidence = max(0.0, 1.0 - 2 * d ** dim / budget ** 2)
    return RegretBound(value=value, confidence=confidence)


def online_regret_bound(
    budget: float,
    params: RegretBoundParams,
    config: MechanismConfig,
    dim: int,
    mu_min: float,
) -> RegretBound:
    """Expected regret bound of the on-line mechanism; infinite for a degenerate instance."""
    if budget <= config.b_min * config.k:
        raise InvalidParameterError(f'budget must exceed K * b_min, got {budget!r}')
    if mu_min <= 0:
        raise InvalidParameterError(f'mu_min must be > 0, got {mu_min!r}')
    alpha, L = config.hoelder.alpha, config.hoelder.L
    k, b_min, b_max, mu_max = config.k, config.b_min, config.b_max, config.mu_max

    eps0 = b_max * mu_max ** 2 / (b_min ** 2 * mu_min) + mu_max / b_min
    eps1 = 2 ** dim * (b_max * mu_max / b_min + params.nabla_max)
    if params.delta_min > 0:
        eps2 = 8 ** dim * (b_max * mu_max + b_min * params.nabla_max) / (b_min ** 3 * params.delta_min ** 2)
    else:
        eps2 = math.inf

    tail = budget ** (dim / (3 * alpha + dim))
    value = (
        eps0 * budget
        + 4 * L * dim ** (alpha / 2) / b_min * budget ** _growth_exponent(alpha, dim)
        + eps1 * (k * math.pi ** 2 / 3 + 2) * tail
        + eps2 * k ** 2 * (k + 1) * tail * math.log(budget / (b_min * k))
    )
    return RegretBound(value=value, confidence=1.0)
