"""Reverse-auction core: ratio ranking, top-K selection and second-price payments."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .exceptions import InsufficientCompetitionError, InvalidParameterError

__all__ = [
    'ScoredWorker',
    'SelectionOutcome',
    'rank_by_ratio',
    'rank_rows',
    'select_and_price',
    'select_top_k',
    'utility',
]


@dataclass(frozen=True)
class ScoredWorker:
    """A worker as seen by the auction: a score (mu, mu_Q or a UCB) and a bid."""

    worker_id: int
    score: float
    bid: float

    def __post_init__(self) -> None:
        if not self.bid > 0:
            raise InvalidParameterError(f'worker {self.worker_id}: bid must be > 0, got {self.bid!r}')
        if np.isnan(self.score) or self.score < 0:
            raise InvalidParameterError(f'worker {self.worker_id}: score must be >= 0, got {self.score!r}')

    @property
    def ratio(self) -> float:
        return self.score / self.bid


@dataclass(frozen=True)
class SelectionOutcome:
    """
    Top-K workers of one auction and their payments.

    rows indexes the selected workers in the arrays the auction was run on; pivot_ratio
    is the (K+1)-th ranked ratio the payments are pegged to.
    """

    selected: np.ndarray
    payments: np.ndarray
    pivot_ratio: float
    rows: np.ndarray

    @property
    def total_payment(self) -> float:
        return float(self.payments.sum())

    def payment_of(self, worker_id: int) -> float:
        """Payment to a worker, 0 when it was not selected."""
        hits = np.flatnonzero(self.selected == worker_id)
        return float(self.payments[hits[0]]) if hits.size else 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            'selected': [int(w) for w in self.selected],
            'payments': [float(p) for p in self.payments],
            'pivot_ratio': self.pivot_ratio,
        }


def _ratios(scores: np.ndarray, bids: np.ndarray) -> np.ndarray:
    if np.any(bids <= 0):
        raise InvalidParameterError('bids must be > 0')
    if np.any(np.isnan(scores)) or np.any(scores < 0):
        raise InvalidParameterError('scores must be >= 0')
    return scores / bids


def rank_rows(ids: np.ndarray, scores: np.ndarray, bids: np.ndarray) -> np.ndarray:
    """Row order by decreasing score/bid ratio, ties by ascending id."""
    ratios = _ratios(np.asarray(scores, dtype=float), np.asarray(bids, dtype=float))
    return np.lexsort((np.asarray(ids), -ratios))


def rank_by_ratio(workers: Sequence[ScoredWorker]) -> list[ScoredWorker]:
    """Sort workers by decreasing ratio with ascending-id tie-break."""
    if not workers:
        return []
    order = rank_rows(
        np.asarray([w.worker_id for w in workers]),
        np.asarray([w.score for w in workers], dtype=float),
        np.asarray([w.bid for w in workers], dtype=float),
    )
    return [workers[i] for i in order]


def _price(scores: np.ndarray, bids: np.ndarray, pivot: float, b_max: float) -> np.ndarray:
    # A zero pivot, an infinite pivot or an infinite own score all pay the cap
    with np.errstate(divide='ignore', invalid='ignore'):
        raw = scores / pivot if pivot > 0 else np.full(scores.shape, np.inf)
    raw = np.where(np.isfinite(raw), raw, b_max)
    return np.minimum(np.maximum(raw, bids), b_max)


def select_top_k(
    ids: np.ndarray,
    scores: np.ndarray,
    bids: np.ndarray,
    k: int,
    b_max: float,
) -> SelectionOutcome:
    """
    Rank by ratio, take the top K and pay each min(u_i / rho_{K+1}, b_max).

    The payment never falls below the worker's own bid; that bound holds exactly in real
    arithmetic and the clamp only removes rounding error.
    """
    if k < 1:
        raise InvalidParameterError(f'K must be >= 1, got {k}')
    ids = np.asarray(ids)
    scores = np.asarray(scores, dtype=float)
    bids = np.asarray(bids, dtype=float)
    if ids.shape[0] < k + 1:
        raise InsufficientCompetitionError(int(ids.shape[0]), k)

    order = rank_rows(ids, scores, bids)
    rows = order[:k]
    pivot_row = order[k]
    pivot = float(scores[pivot_row] / bids[pivot_row])
    payments = _price(scores[rows], bids[rows], pivot, b_max)
    return SelectionOutcome(selected=ids[rows], payments=payments, pivot_ratio=pivot, rows=rows)


def select_and_price(ranked: Sequence[ScoredWorker], k: int, b_max: float) -> SelectionOutcome:
    """Select the top K of an already ranked list and price them against the (K+1)-th."""
    if k < 1:
        raise InvalidParameterError(f'K must be >= 1, got {k}')
    if len(ranked) < k + 1:
        raise InsufficientCompetitionError(len(ranked), k)
    head = ranked[:k]
    pivot = ranked[k].ratio
    payments = _price(
        np.asarray([w.score for w in head], dtype=float),
        np.asarray([w.bid for w in head], dtype=float),
        pivot,
        b_max,
    )
    return SelectionOutcome(
        selected=np.asarray([w.worker_id for w in head], dtype=np.int64),
        payments=payments,
        pivot_ratio=pivot,
        rows=np.arange(k),
    )


def utility(selected: bool, payment: float, true_cost: float) -> float:
    """Worker utility x * (p - c)."""
    if payment < 0:
        raise InvalidParameterError(f'payment must be >= 0, got {payment!r}')
    return payment - true_cost if selected else 0.0
