"""Worker data model, the fixed off-line pool and its synthetic generator."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from ..context_space import ContextVector
from ..exceptions import InvalidParameterError
from .quality import QualityFunction
from .rewards import BernoulliRewards, ReplayRewards, RewardSource

__all__ = [
    'Worker',
    'OfflinePool',
    'generate_offline_pool',
    'sample_reward',
    'sample_rewards',
]


@dataclass(frozen=True)
class Worker:
    """One crowdsensing worker; true_cost and true_quality are private."""

    id: int
    context: ContextVector
    true_cost: float
    bid: float
    true_quality: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.true_quality <= 1.0):
            raise InvalidParameterError(
                f'worker {self.id}: quality {self.true_quality!r} outside [0, 1]'
            )
        if not self.bid > 0:
            raise InvalidParameterError(f'worker {self.id}: bid must be > 0, got {self.bid!r}')


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class OfflinePool:
    """
    A fixed group of workers stored column-wise.

    Row i of every array describes the same worker; mechanisms address workers by row
    and report worker ids in traces.
    """

    ids: np.ndarray
    contexts: np.ndarray
    costs: np.ndarray
    bids: np.ndarray
    qualities: np.ndarray
    reward_samples: Mapping[int, np.ndarray] | None = None
    _index: dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        ids = _frozen(np.asarray(self.ids, dtype=np.int64))
        contexts = np.asarray(self.contexts, dtype=float)
        if contexts.ndim == 1:
            contexts = contexts.reshape(-1, 1)
        contexts = _frozen(contexts)
        costs = _frozen(np.asarray(self.costs, dtype=float))
        bids = _frozen(np.asarray(self.bids, dtype=float))
        qualities = _frozen(np.asarray(self.qualities, dtype=float))

        n = ids.shape[0]
        if n < 1:
            raise InvalidParameterError('a pool needs at least one worker')
        for name, array in (('costs', costs), ('bids', bids), ('qualities', qualities)):
            if array.shape != (n,):
                raise InvalidParameterError(f'{name} must have shape ({n},), got {array.shape}')
        if contexts.shape[0] != n:
            raise InvalidParameterError(f'contexts must have {n} rows, got {contexts.shape[0]}')
        if np.any(contexts < 0.0) or np.any(contexts > 1.0):
            raise InvalidParameterError('contexts must lie in [0, 1]')
        if np.any(qualities < 0.0) or np.any(qualities > 1.0):
            raise InvalidParameterError('qualities must lie in [0, 1]')
        if np.any(bids <= 0.0):
            raise InvalidParameterError('bids must be > 0')

        index = {int(worker_id): row for row, worker_id in enumerate(ids)}
        if len(index) != n:
            raise InvalidParameterError('worker ids must be unique within a pool')

        object.__setattr__(self, 'ids', ids)
        object.__setattr__(self, 'contexts', contexts)
        object.__setattr__(self, 'costs', costs)
        object.__setattr__(self, 'bids', bids)
        object.__setattr__(self, 'qualities', qualities)
        object.__setattr__(self, '_index', index)

    def __len__(self) -> int:
        return int(self.ids.shape[0])

    def __iter__(self) -> Iterator[Worker]:
        for row in range(len(self)):
            yield self.worker(row)

    @property
    def dim(self) -> int:
        return int(self.contexts.shape[1])

    def worker(self, row: int) -> Worker:
        return Worker(
            id=int(self.ids[row]),
            context=ContextVector(tuple(float(c) for c in self.contexts[row])),
            true_cost=float(self.costs[row]),
            bid=float(self.bids[row]),
            true_quality=float(self.qualities[row]),
        )

    def has_worker(self, worker_id: int) -> bool:
        return int(worker_id) in self._index

    def row_of(self, worker_id: int) -> int:
        try:
            return self._index[int(worker_id)]
        except KeyError:
            raise InvalidParameterError(f'worker {worker_id} is not in the pool') from None

    def rows_of(self, worker_ids: np.ndarray) -> np.ndarray:
        return np.asarray([self.row_of(w) for w in worker_ids], dtype=np.int64)

    def with_bid(self, worker_id: int, bid: float) -> OfflinePool:
        """Copy of the pool with one worker's bid replaced."""
        row = self.row_of(worker_id)
        bids = np.array(self.bids)
        bids[row] = bid
        return OfflinePool(
            ids=self.ids,
            contexts=self.contexts,
            costs=self.costs,
            bids=bids,
            qualities=self.qualities,
            reward_samples=self.reward_samples,
        )

    def new_reward_source(self) -> RewardSource:
        """Fresh reward source for one run (replay state is per run)."""
        if self.reward_samples is not None:
            return ReplayRewards(self.reward_samples)
        return BernoulliRewards()

    def fingerprint(self) -> str:
        """Hash of everything except bids, so bid probes keep the population identity."""
        digest = hashlib.sha256()
        for array in (self.ids, self.contexts, self.costs, self.qualities):
            digest.update(np.ascontiguousarray(array).tobytes())
        return digest.hexdigest()[:16]


def sample_reward(worker: Worker, rng: np.random.Generator) -> int:
    """Bernoulli reward with success probability equal to the worker's quality."""
    return int(rng.random() < worker.true_quality)


def sample_rewards(qualities: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Vectorized sample_reward; one uniform draw per entry."""
    qualities = np.asarray(qualities, dtype=float)
    return (rng.random(qualities.shape[0]) < qualities).astype(np.int8)


def generate_offline_pool(
    n: int,
    dim: int,
    cost_range: tuple[float, float],
    quality_fn: QualityFunction,
    seed: int,
    strategic: bool = False,
    b_max: float = 1.0,
    first_id: int = 0,
) -> OfflinePool:
    """
    Synthetic pool: uniform contexts and costs, truthful or strategic bids.

    In strategic mode each worker draws its bid uniformly from [c_i, b_max].
    """
    if n < 1:
        raise InvalidParameterError(f'n must be >= 1, got {n}')
    if dim < 1:
        raise InvalidParameterError(f'dimension M must be >= 1, got {dim}')
    c_min, c_max = cost_range
    if not (0.0 < c_min <= c_max):
        raise InvalidParameterError(f'empty or non-positive cost range {cost_range!r}')
    if strategic and b_max < c_max:
        raise InvalidParameterError(f'b_max {b_max!r} below the largest cost {c_max!r}')

    rng = np.random.default_rng(seed)
    contexts = rng.random((n, dim))
    costs = rng.uniform(c_min, c_max, size=n) if c_max > c_min else np.full(n, c_min)
    bids = rng.uniform(costs, b_max) if strategic else costs.copy()

    return OfflinePool(
        ids=np.arange(first_id, first_id + n, dtype=np.int64),
        contexts=contexts,
        costs=costs,
        bids=bids,
        qualities=quality_fn.evaluate(contexts),
    )
