"""Reward realization: Bernoulli draws or replay of recorded observations."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Mapping

import numpy as np

__all__ = ['RewardSource', 'BernoulliRewards', 'ReplayRewards']


class RewardSource(ABC):
    """Produces 0/1 rewards for selected workers; consumes one uniform per selection."""

    def __init__(self) -> None:
        self.diagnostics: list[str] = []

    @abstractmethod
    def draw(
        self,
        worker_ids: np.ndarray,
        qualities: np.ndarray,
        rng: np.random.Generator,
    ) -> np.ndarray:
        """Return an int8 reward per selected worker."""


class BernoulliRewards(RewardSource):
    """Independent Bernoulli(mu_i) rewards."""

    def draw(
        self,
        worker_ids: np.ndarray,
        qualities: np.ndarray,
        rng: np.random.Generator,
    ) -> np.ndarray:
        qualities = np.asarray(qualities, dtype=float)
        return (rng.random(qualities.shape[0]) < qualities).astype(np.int8)


class ReplayRewards(RewardSource):
    """
    Replays each worker's recorded 0/1 samples without replacement.

    A worker whose samples are used up starts over with its full set; that case is
    reported in diagnostics.
    """

    def __init__(self, samples: Mapping[int, np.ndarray]) -> None:
        super().__init__()
        self._samples = {int(k): np.asarray(v, dtype=np.int8) for k, v in samples.items()}
        self._remaining: dict[int, list[int]] = {}

    def draw(
        self,
        worker_ids: np.ndarray,
        qualities: np.ndarray,
        rng: np.random.Generator,
    ) -> np.ndarray:
        uniforms = rng.random(len(worker_ids))
        rewards = np.zeros(len(worker_ids), dtype=np.int8)

        for j, worker_id in enumerate(worker_ids):
            worker_id = int(worker_id)
            recorded = self._samples.get(worker_id)
            if recorded is None or recorded.size == 0:
                # No observations for this worker: fall back to its quality
                rewards[j] = int(uniforms[j] < qualities[j])
                continue

            remaining = self._remaining.get(worker_id)
            if not remaining:
                if remaining is not None:
                    self.diagnostics.append(f'worker {worker_id}: recorded rewards exhausted, replaying')
                remaining = list(range(recorded.size))
                self._remaining[worker_id] = remaining

            pick = min(int(uniforms[j] * len(remaining)), len(remaining) - 1)
            rewards[j] = recorded[remaining.pop(pick)]

        return rewards
