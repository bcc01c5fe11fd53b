"""Exploration budget and upper confidence bound indices."""

from __future__ import annotations

import math

import numpy as np

from ..exceptions import BudgetTooSmallError, InvalidParameterError
from .state import BanditState

__all__ = [
    'explore_budget',
    'explore_budget_for_cells',
    'ucb_offline',
    'ucb_online',
    'offline_indices',
    'online_indices',
]


def explore_budget_for_cells(budget: float, b_max: float, mu_max: float, cells: int) -> float:
    """Exploration budget written in terms of the cell count d^M."""
    if not math.isfinite(budget) or budget <= 1:
        raise BudgetTooSmallError(budget)
    if cells < 1:
        raise InvalidParameterError(f'cell count must be >= 1, got {cells}')
    value = (
        (b_max / mu_max ** 2) ** (1.0 / 3.0)
        * float(cells) ** (1.0 / 3.0)
        * budget ** (2.0 / 3.0)
        * math.log(budget) ** (1.0 / 3.0)
    )
    return min(value, float(budget))


def explore_budget(budget: float, b_max: float, mu_max: float, d: int, dim: int) -> float:
    """
    B# = (b_max / mu_max^2)^{1/3} d^{M/3} B^{2/3} (ln B)^{1/3}, clamped to B.

    Raises BudgetTooSmallError when B <= 1 (ln B <= 0).
    """
    if d < 1 or dim < 1:
        raise InvalidParameterError(f'need d >= 1 and M >= 1, got d={d}, M={dim}')
    return explore_budget_for_cells(budget, b_max, mu_max, d ** dim)


def _log_budget(budget: float) -> float:
    return math.log(budget) if budget > 1 else 0.0


def ucb_offline(state: BanditState, cube: int, budget: float) -> float:
    """r-bar(Q) + sqrt(ln B / lambda(Q)); +inf for a cube never pulled."""
    count = int(state.counts[cube])
    if count == 0:
        return math.inf
    return state.mean(cube) + math.sqrt(_log_budget(budget) / count)


def ucb_online(state: BanditState, cube: int, t: int, k: int) -> float:
    """r-bar(Q) + sqrt((K+1) ln t / lambda(Q)); +inf for a cube never pulled."""
    if k < 1:
        raise InvalidParameterError(f'K must be >= 1, got {k}')
    if t < 1:
        raise InvalidParameterError(f'slot index must be >= 1, got {t}')
    count = int(state.counts[cube])
    if count == 0:
        return math.inf
    return state.mean(cube) + math.sqrt((k + 1) * math.log(t) / count)


def offline_indices(state: BanditState, budget: float) -> np.ndarray:
    """ucb_offline for every arm at once."""
    counts = state.counts
    with np.errstate(divide='ignore', invalid='ignore'):
        bonus = np.sqrt(_log_budget(budget) / counts)
    return np.where(counts > 0, state.means + bonus, np.inf)


def online_indices(state: BanditState, t: int, k: int) -> np.ndarray:
    """ucb_online for every arm at once."""
    if k < 1 or t < 1:
        raise InvalidParameterError(f'need K >= 1 and t >= 1, got K={k}, t={t}')
    counts = state.counts
    with np.errstate(divide='ignore', invalid='ignore'):
        bonus = np.sqrt((k + 1) * math.log(t) / counts)
    return np.where(counts > 0, state.means + bonus, np.inf)
