"""Learning state and budget accounting carried through a mechanism run."""

from __future__ import annotations

import math

import numpy as np

from ..exceptions import InvalidParameterError

__all__ = ['BanditState', 'BudgetLedger', 'affordable_slots']

# Dense per-arm arrays beyond this size would not fit a desk machine
MAX_ARMS = 1 << 24


class BanditState:
    """
    Per-arm pull counts and empirical mean rewards.

    Arms are hypercubes for the context-aware mechanisms and individual workers for the
    per-worker references. Means are kept as reward sums so repeated updates do not drift.
    """

    def __init__(self, arm_count: int) -> None:
        if arm_count < 1:
            raise InvalidParameterError(f'need at least one arm, got {arm_count}')
        if arm_count > MAX_ARMS:
            raise InvalidParameterError(f'{arm_count} arms exceed the dense state limit {MAX_ARMS}')
        self.arm_count = int(arm_count)
        self.counts = np.zeros(self.arm_count, dtype=np.int64)
        self.sums = np.zeros(self.arm_count, dtype=np.float64)

    @property
    def means(self) -> np.ndarray:
        """r-bar per arm; 0 for arms never pulled."""
        out = np.zeros(self.arm_count, dtype=np.float64)
        pulled = self.counts > 0
        out[pulled] = self.sums[pulled] / self.counts[pulled]
        return out

    @property
    def total_pulls(self) -> int:
        return int(self.counts.sum())

    def mean(self, arm: int) -> float:
        count = int(self.counts[arm])
        return float(self.sums[arm]) / count if count else 0.0

    def update(self, arms: np.ndarray, rewards: np.ndarray) -> None:
        """Feed observed rewards for the given arms (one entry per selection)."""
        arms = np.asarray(arms, dtype=np.int64).ravel()
        rewards = np.asarray(rewards, dtype=np.float64).ravel()
        if arms.shape != rewards.shape:
            raise InvalidParameterError('one reward per pulled arm is required')
        np.add.at(self.counts, arms, 1)
        np.add.at(self.sums, arms, rewards)

    def copy(self) -> BanditState:
        clone = BanditState(self.arm_count)
        clone.counts[:] = self.counts
        clone.sums[:] = self.sums
        return clone


def affordable_slots(residual: float, per_slot: float) -> int:
    """Largest n with n * per_slot <= residual, evaluated in floating point."""
    if per_slot <= 0:
        raise InvalidParameterError(f'per-slot spend must be > 0, got {per_slot!r}')
    if residual < per_slot:
        return 0
    n = int(math.floor(residual / per_slot))
    while n > 0 and n * per_slot > residual:
        n -= 1
    while (n + 1) * per_slot <= residual:
        n += 1
    return n


class BudgetLedger:
    """Initial budget, residual and per-slot spend history; the residual never goes negative."""

    def __init__(self, budget: float) -> None:
        if not math.isfinite(budget) or budget < 0:
            raise InvalidParameterError(f'budget must be finite and >= 0, got {budget!r}')
        self.initial = float(budget)
        self.residual = float(budget)
        self.history: list[float] = []

    @property
    def spent(self) -> float:
        return self.initial - self.residual

    def can_afford(self, amount: float) -> bool:
        return amount <= self.residual

    def charge(self, amount: float) -> float:
        """Deduct one slot's spend and return the new residual."""
        if amount > self.residual:
            raise InvalidParameterError(
                f'slot spend {amount!r} exceeds the residual budget {self.residual!r}'
            )
        self.residual -= amount
        self.history.append(float(amount))
        return self.residual

    def charge_slots(self, per_slot: float, count: int) -> np.ndarray:
        """Deduct count identical slots; returns the residual after each of them."""
        if count <= 0:
            return np.empty(0, dtype=np.float64)
        if count * per_slot > self.residual:
            raise InvalidParameterError(
                f'{count} slots of {per_slot!r} exceed the residual budget {self.residual!r}'
            )
        start = self.residual
        residuals = start - per_slot * np.arange(1, count + 1, dtype=np.float64)
        self.residual = start - count * per_slot
        residuals[-1] = self.residual
        np.maximum(residuals, self.residual, out=residuals)
        self.history.extend([float(per_slot)] * count)
        return residuals
