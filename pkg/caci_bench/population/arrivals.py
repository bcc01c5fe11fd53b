"""On-line arrival streams: the set of available workers changes every slot."""

from __future__ import annotations

import hashlib
import json
from abc import ABC, abstractmethod
from typing import Mapping, Sequence

import numpy as np

from ..exceptions import InvalidParameterError
from .quality import QualityFunction
from .rewards import BernoulliRewards, ReplayRewards, RewardSource
from .workers import OfflinePool, generate_offline_pool

__all__ = ['ArrivalProcess', 'SyntheticArrivals', 'RecordedArrivals']


class ArrivalProcess(ABC):
    """Per-slot generator of available workers, slots numbered from 1."""

    @property
    @abstractmethod
    def dim(self) -> int:
        """Context dimension M."""

    @property
    @abstractmethod
    def horizon(self) -> int | None:
        """Number of slots, or None for an unbounded stream."""

    @abstractmethod
    def slot(self, t: int) -> OfflinePool:
        """Workers available in slot t."""

    @abstractmethod
    def with_bid(self, worker_id: int, bid: float) -> ArrivalProcess:
        """Copy with one worker's bid replaced wherever it appears."""

    @abstractmethod
    def fingerprint(self) -> str:
        """Population identity, independent of bids."""

    def new_reward_source(self) -> RewardSource:
        return BernoulliRewards()

    def slots(self, limit: int) -> list[OfflinePool]:
        """Materialize the first slots (all of them if the stream is shorter)."""
        count = limit if self.horizon is None else min(limit, self.horizon)
        return [self.slot(t) for t in range(1, count + 1)]


def _apply_bids(pool: OfflinePool, overrides: Mapping[int, float]) -> OfflinePool:
    for worker_id, bid in overrides.items():
        if pool.has_worker(worker_id):
            pool = pool.with_bid(worker_id, bid)
    return pool


class SyntheticArrivals(ArrivalProcess):
    """
    Seeded synthetic stream.

    Each slot is generated from its own stream seeded by (seed, t), so any slot can be
    regenerated independently and every mechanism sees the same workers. With
    repeat_ids the slot is a random subset of a fixed base population of pool_size
    workers; otherwise every slot brings fresh ids.
    """

    def __init__(
        self,
        workers_per_slot: int,
        dim: int,
        cost_range: tuple[float, float],
        quality_fn: QualityFunction,
        seed: int,
        strategic: bool = False,
        b_max: float = 1.0,
        repeat_ids: bool = False,
        pool_size: int | None = None,
        horizon: int | None = None,
        bid_overrides: Mapping[int, float] | None = None,
    ) -> None:
        if workers_per_slot < 1:
            raise InvalidParameterError(f'workers_per_slot must be >= 1, got {workers_per_slot}')
        if horizon is not None and horizon < 1:
            raise InvalidParameterError(f'horizon must be >= 1, got {horizon}')
        self.workers_per_slot = workers_per_slot
        self._dim = dim
        self.cost_range = cost_range
        self.quality_fn = quality_fn
        self.seed = seed
        self.strategic = strategic
        self.b_max = b_max
        self.repeat_ids = repeat_ids
        self.pool_size = pool_size or 5 * workers_per_slot
        self._horizon = horizon
        self._bid_overrides = dict(bid_overrides or {})
        self._base: OfflinePool | None = None

        if repeat_ids:
            if self.pool_size < workers_per_slot:
                raise InvalidParameterError(
                    f'pool_size {self.pool_size} smaller than workers_per_slot {workers_per_slot}'
                )
            self._base = generate_offline_pool(
                self.pool_size, dim, cost_range, quality_fn, seed, strategic, b_max
            )

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def horizon(self) -> int | None:
        return self._horizon

    def slot(self, t: int) -> OfflinePool:
        if t < 1 or (self._horizon is not None and t > self._horizon):
            raise InvalidParameterError(f'slot {t} outside the stream')

        if self._base is not None:
            rng = np.random.default_rng([self.seed, t])
            rows = np.sort(rng.choice(len(self._base), size=self.workers_per_slot, replace=False))
            base = self._base
            pool = OfflinePool(
                ids=base.ids[rows],
                contexts=base.contexts[rows],
                costs=base.costs[rows],
                bids=base.bids[rows],
                qualities=base.qualities[rows],
            )
        else:
            pool = generate_offline_pool(
                self.workers_per_slot,
                self._dim,
                self.cost_range,
                self.quality_fn,
                seed=int(np.random.SeedSequence([self.seed, t]).generate_state(1)[0]),
                strategic=self.strategic,
                b_max=self.b_max,
                first_id=(t - 1) * self.workers_per_slot,
            )
        return _apply_bids(pool, self._bid_overrides)

    def with_bid(self, worker_id: int, bid: float) -> SyntheticArrivals:
        overrides = dict(self._bid_overrides)
        overrides[int(worker_id)] = float(bid)
        return SyntheticArrivals(
            self.workers_per_slot,
            self._dim,
            self.cost_range,
            self.quality_fn,
            self.seed,
            strategic=self.strategic,
            b_max=self.b_max,
            repeat_ids=self.repeat_ids,
            pool_size=self.pool_size,
            horizon=self._horizon,
            bid_overrides=overrides,
        )

    def fingerprint(self) -> str:
        spec = {
            'kind': 'synthetic',
            'workers_per_slot': self.workers_per_slot,
            'dim': self._dim,
            'cost_range': list(self.cost_range),
            'quality': self.quality_fn.describe(),
            'seed': self.seed,
            'strategic': self.strategic,
            'repeat_ids': self.repeat_ids,
            'pool_size': self.pool_size,
            'horizon': self._horizon,
        }
        return hashlib.sha256(json.dumps(spec, sort_keys=True).encode()).hexdigest()[:16]


class RecordedArrivals(ArrivalProcess):
    """A finite stream replayed from materialized slots (for example a CSV file)."""

    def __init__(
        self,
        slots: Sequence[OfflinePool],
        reward_samples: Mapping[int, np.ndarray] | None = None,
        slot_labels: Sequence[int] | None = None,
    ) -> None:
        if not slots:
            raise InvalidParameterError('a recorded stream needs at least one slot')
        dims = {pool.dim for pool in slots}
        if len(dims) != 1:
            raise InvalidParameterError(f'slots disagree on context dimension: {sorted(dims)}')
        self._slots = list(slots)
        self.reward_samples = reward_samples
        self.slot_labels = list(slot_labels) if slot_labels is not None else list(range(1, len(slots) + 1))

    @property
    def dim(self) -> int:
        return self._slots[0].dim

    @property
    def horizon(self) -> int:
        return len(self._slots)

    def slot(self, t: int) -> OfflinePool:
        if not (1 <= t <= len(self._slots)):
            raise InvalidParameterError(f'slot {t} outside the stream of {len(self._slots)} slots')
        return self._slots[t - 1]

    def with_bid(self, worker_id: int, bid: float) -> RecordedArrivals:
        slots = [_apply_bids(pool, {int(worker_id): float(bid)}) for pool in self._slots]
        return RecordedArrivals(slots, self.reward_samples, self.slot_labels)

    def new_reward_source(self) -> RewardSource:
        if self.reward_samples is not None:
            return ReplayRewards(self.reward_samples)
        return BernoulliRewards()

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        for pool in self._slots:
            digest.update(pool.fingerprint().encode())
        return digest.hexdigest()[:16]
