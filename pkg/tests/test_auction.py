"""Tests for ratio ranking and second-price payments."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caci_bench.auction import ScoredWorker, rank_by_ratio, select_and_price, select_top_k, utility
from caci_bench.exceptions import InsufficientCompetitionError, InvalidParameterError


def _instance(seed, n):
    rng = np.random.default_rng(seed)
    scores = rng.uniform(0.05, 1.0, size=n)
    bids = rng.uniform(0.2, 1.0, size=n)
    return np.arange(n), scores, bids


def test_rank_equal_bids_orders_by_score():
    """With equal bids the ranking is by score."""
    workers = [ScoredWorker(1, 0.9, 0.5), ScoredWorker(2, 0.8, 0.5), ScoredWorker(3, 0.5, 0.5)]
    assert [w.worker_id for w in rank_by_ratio(list(reversed(workers)))] == [1, 2, 3]


def test_rank_ties_break_by_lower_id():
    """Identical ratios keep ascending ids."""
    workers = [ScoredWorker(7, 0.4, 0.4), ScoredWorker(3, 0.2, 0.2)]
    assert [w.worker_id for w in rank_by_ratio(workers)] == [3, 7]


def test_rank_by_ratio_not_score():
    """Ratios (1.0, 0.9) rank the lower-score worker first."""
    workers = [ScoredWorker(1, 0.2, 0.2), ScoredWorker(2, 0.9, 1.0)]
    assert [w.worker_id for w in rank_by_ratio(workers)] == [1, 2]


def test_non_positive_bid_rejected():
    """A worker cannot bid zero."""
    with pytest.raises(InvalidParameterError):
        ScoredWorker(1, 0.5, 0.0)


def test_select_and_price_hand_example():
    """K=2 on ratios (1.8, 1.6, 1.0) pays (0.9, 0.8)."""
    ranked = rank_by_ratio([ScoredWorker(i, u, 0.5) for i, u in enumerate([0.9, 0.8, 0.5])])
    outcome = select_and_price(ranked, k=2, b_max=1.0)
    assert list(outcome.selected) == [0, 1]
    assert outcome.pivot_ratio == pytest.approx(1.0)
    np.testing.assert_allclose(outcome.payments, [0.9, 0.8], atol=1e-12)


def test_payment_capped_at_b_max():
    """u / rho_{K+1} = 10 is capped at b_max."""
    outcome = select_top_k(np.array([0, 1]), np.array([1.0, 0.1]), np.array([0.1, 1.0]), 1, 1.0)
    assert outcome.pivot_ratio == pytest.approx(0.1)
    assert outcome.payments[0] == pytest.approx(1.0)
    assert outcome.payment_of(1) == 0.0


def test_symmetric_instance_pays_the_bid():
    """All scores and bids equal: second price degenerates to the bid."""
    outcome = select_top_k(np.arange(4), np.full(4, 0.6), np.full(4, 0.4), 2, 1.0)
    assert list(outcome.selected) == [0, 1]
    np.testing.assert_allclose(outcome.payments, [0.4, 0.4])


def test_zero_pivot_pays_cap():
    """A pivot with zero score leaves payments at b_max."""
    outcome = select_top_k(np.arange(3), np.array([0.5, 0.4, 0.0]), np.full(3, 0.5), 2, 1.0)
    np.testing.assert_allclose(outcome.payments, [1.0, 1.0])


def test_insufficient_competition():
    """K workers without a pivot cannot be priced."""
    with pytest.raises(InsufficientCompetitionError):
        select_top_k(np.arange(2), np.ones(2), np.ones(2), 2, 1.0)
    with pytest.raises(InsufficientCompetitionError):
        select_and_price([ScoredWorker(0, 1.0, 1.0)], 1, 1.0)


def test_utility():
    """x (p - c)."""
    assert utility(True, 0.67, 0.44) == pytest.approx(0.23)
    assert utility(False, 0.67, 0.44) == 0.0
    assert utility(True, 0.5, 0.5) == 0.0


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31), st.integers(min_value=2, max_value=12), st.data())
def test_selection_matches_brute_force(seed, n, data):
    """The selected set maximizes the summed ratio over all K-subsets; payments follow the formula."""
    k = data.draw(st.integers(min_value=1, max_value=min(3, n - 1)))
    ids, scores, bids = _instance(seed, n)
    outcome = select_top_k(ids, scores, bids, k, 1.0)

    ratios = scores / bids
    best = max(itertools.combinations(range(n), k), key=lambda rows: ratios[list(rows)].sum())
    assert set(outcome.selected) == set(best)

    pivot = np.sort(ratios)[::-1][k]
    expected = np.minimum(scores[outcome.rows] / pivot, 1.0)
    np.testing.assert_allclose(outcome.payments, expected, rtol=0, atol=1e-12)


@settings(max_examples=300, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31), st.integers(min_value=2, max_value=10))
def test_payment_bounds(seed, n):
    """bid <= payment <= b_max for every selected worker."""
    ids, scores, bids = _instance(seed, n)
    outcome = select_top_k(ids, scores, bids, 1, 1.0)
    assert np.all(outcome.payments >= bids[outcome.rows])
    assert np.all(outcome.payments <= 1.0)


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 31), st.integers(min_value=3, max_value=10))
def test_payment_is_the_critical_bid(seed, n):
    """
    A winner's payment does not depend on its own bid, and it is the threshold: bidding
    just below keeps it selected, just above (when under the cap) loses.
    """
    ids, scores, bids = _instance(seed, n)
    k = 2
    outcome = select_top_k(ids, scores, bids, k, 1.0)
    for row, payment in zip(outcome.rows, outcome.payments):
        for lower in (bids[row] * 0.5, payment * (1 - 1e-6)):
            moved = bids.copy()
            moved[row] = max(lower, 1e-3)
            again = select_top_k(ids, scores, moved, k, 1.0)
            assert ids[row] in again.selected
            assert again.payment_of(ids[row]) == pytest.approx(payment, abs=1e-12)
        if payment < 1.0:
            moved = bids.copy()
            moved[row] = payment * (1 + 1e-6)
            assert ids[row] not in select_top_k(ids, scores, moved, k, 1.0).selected


@settings(max_examples=200, deadline=None)
@given(
    st.integers(min_value=0, max_value=2 ** 31),
    st.integers(min_value=3, max_value=10),
    st.floats(min_value=0.01, max_value=0.99),
)
def test_selection_monotone_in_bid(seed, n, shrink):
    """Lowering a winner's bid never un-selects it."""
    ids, scores, bids = _instance(seed, n)
    outcome = select_top_k(ids, scores, bids, 1, 1.0)
    row = outcome.rows[0]
    moved = bids.copy()
    moved[row] = bids[row] * shrink
    assert ids[row] in select_top_k(ids, scores, moved, 1, 1.0).selected
