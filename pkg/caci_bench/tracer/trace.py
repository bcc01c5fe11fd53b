"""Per-slot outcome records of one mechanism run."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np
import pandas as pd

PHASES = ('init', 'exploration', 'exploitation', 'skipped')


@dataclass(frozen=True)
class SlotRecord:
    """What happened in one time slot."""

    slot: int
    phase: str
    selected: tuple[int, ...]
    payments: tuple[float, ...]
    rewards: tuple[int, ...]
    expected_reward: float
    residual_budget: float

    def to_dict(self) -> dict[str, Any]:
        return {
            'slot': self.slot,
            'phase': self.phase,
            'selected': list(self.selected),
            'payments': list(self.payments),
            'rewards': list(self.rewards),
            'expected_reward': self.expected_reward,
            'residual_budget': self.residual_budget,
        }


@dataclass(frozen=True, eq=False)
class SlotBlock:
    """
    Consecutive slots of one phase with the same number of selections per slot.

    Every array has one row per slot; a fixed exploitation set is stored as a broadcast
    view, so long runs cost one row of ids however many slots they span.
    """

    phase: str
    slots: np.ndarray
    selected: np.ndarray
    payments: np.ndarray
    rewards: np.ndarray
    expected: np.ndarray
    residuals: np.ndarray

    def __len__(self) -> int:
        return int(self.slots.shape[0])

    @property
    def width(self) -> int:
        return int(self.selected.shape[1]) if self.selected.ndim == 2 else 0


@dataclass
class ExperimentTrace:
    """Self-describing record of one mechanism run on one population and budget."""

    mechanism: str
    budget: float
    population_fingerprint: str
    blocks: list[SlotBlock] = field(default_factory=list)
    params: dict[str, Any] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    residual: float = 0.0
    seed: int | None = None
    config_hash: str | None = None
    label: str | None = None

    @property
    def name(self) -> str:
        return self.label or self.mechanism

    @property
    def slot_count(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def slots_executed(self) -> int:
        return sum(len(b) for b in self.blocks if b.width > 0)

    @property
    def selection_count(self) -> int:
        return sum(len(b) * b.width for b in self.blocks)

    @property
    def cumulative_reward_realized(self) -> int:
        return int(sum(int(b.rewards.sum()) for b in self.blocks))

    @property
    def cumulative_reward_expected(self) -> float:
        return float(sum(float(b.expected.sum()) for b in self.blocks))

    @property
    def budget_spent(self) -> float:
        return self.budget - self.residual

    def phase_slots(self, phase: str) -> int:
        return sum(len(b) for b in self.blocks if b.phase == phase)

    def records(self) -> Iterator[SlotRecord]:
        for block in self.blocks:
            for i in range(len(block)):
                yield SlotRecord(
                    slot=int(block.slots[i]),
                    phase=block.phase,
                    selected=tuple(int(w) for w in block.selected[i]),
                    payments=tuple(float(p) for p in block.payments[i]),
                    rewards=tuple(int(r) for r in block.rewards[i]),
                    expected_reward=float(block.expected[i]),
                    residual_budget=float(block.residuals[i]),
                )

    def expected_series(self) -> np.ndarray:
        """Cumulative expected reward after each recorded slot."""
        if not self.blocks:
            return np.empty(0)
        return np.cumsum(np.concatenate([b.expected for b in self.blocks]))

    def realized_series(self) -> np.ndarray:
        """Cumulative realized reward after each recorded slot."""
        if not self.blocks:
            return np.empty(0, dtype=np.int64)
        per_slot = [b.rewards.sum(axis=1) if b.width else np.zeros(len(b)) for b in self.blocks]
        return np.cumsum(np.concatenate(per_slot)).astype(np.int64)

    def selections(self) -> pd.DataFrame:
        """One row per selection event: slot, phase, worker_id, payment, reward."""
        blocks = [b for b in self.blocks if b.width > 0]
        if not blocks:
            return pd.DataFrame({
                'slot': np.empty(0, dtype=np.int64),
                'phase': np.empty(0, dtype=object),
                'worker_id': np.empty(0, dtype=np.int64),
                'payment': np.empty(0),
                'reward': np.empty(0, dtype=np.int8),
            })
        return pd.DataFrame({
            'slot': np.concatenate([np.repeat(b.slots, b.width) for b in blocks]),
            'phase': np.concatenate([np.full(len(b) * b.width, b.phase, dtype=object) for b in blocks]),
            'worker_id': np.concatenate([np.asarray(b.selected).ravel() for b in blocks]),
            'payment': np.concatenate([np.asarray(b.payments).ravel() for b in blocks]),
            'reward': np.concatenate([np.asarray(b.rewards).ravel() for b in blocks]),
        })

    def to_frame(self) -> pd.DataFrame:
        """Per-slot table in the layout of the trace CSV files."""
        records = list(self.records())
        frame = pd.DataFrame({
            'slot': [r.slot for r in records],
            'phase': [r.phase for r in records],
            'selected': [' '.join(str(w) for w in r.selected) for r in records],
            'payments': [' '.join(repr(p) for p in r.payments) for r in records],
            'rewards': [' '.join(str(x) for x in r.rewards) for r in records],
            'expected_reward': [r.expected_reward for r in records],
            'residual_budget': [r.residual_budget for r in records],
        })
        frame['cumulative_reward_realized'] = self.realized_series()
        frame['cumulative_reward_expected'] = self.expected_series()
        return frame

    def summary(self) -> dict[str, Any]:
        return {
            'mechanism': self.name,
            'budget': self.budget,
            'seed': self.seed,
            'config_hash': self.config_hash,
            'population': self.population_fingerprint,
            'slots_executed': self.slots_executed,
            'cumulative_reward_realized': self.cumulative_reward_realized,
            'cumulative_reward_expected': self.cumulative_reward_expected,
            'budget_spent': self.budget_spent,
            **self.params,
        }
