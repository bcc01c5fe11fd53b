"""Tests for the mechanism state machines, their indices and budget accounting."""

import math

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caci_bench.context_space import HoelderParams
from caci_bench.exceptions import BudgetTooSmallError, ConfigError, InvalidParameterError
from caci_bench.mechanisms import (
    BanditState,
    BudgetLedger,
    CubeIndex,
    MechanismConfig,
    affordable_slots,
    explore_budget,
    get_mechanism,
    mechanism_mode,
    pick_round_robin,
    resolve_mechanism,
    run_baseline_offline,
    run_caci_offline,
    run_caci_online,
    run_cmab_individual,
    run_epsilon_first,
    ucb_offline,
    ucb_online,
)
from caci_bench.population import BumpField, generate_offline_pool
from caci_bench.tracer import TraceRecorder

from conftest import make_pool

OFFLINE = ['baseline_offline', 'caci_offline', 'eps_first_offline', 'cmab_individual']
ONLINE = ['baseline_online', 'caci_online', 'eps_first_online']


def _run(mechanism_id, population, config, budget, seed=0):
    return get_mechanism(mechanism_id)(population, config, budget, np.random.default_rng(seed))


def _check_budget_and_width(trace, config):
    assert trace.budget_spent <= trace.budget + 1e-9
    assert trace.residual >= 0
    for block in trace.blocks:
        assert np.all(block.residuals >= -1e-9)
        if block.phase in ('exploration', 'exploitation'):
            assert block.width == config.k
        if block.phase in ('exploration', 'init'):
            assert np.all(block.payments == config.b_max)
    spent = sum(float(np.asarray(b.payments).sum(axis=1).sum()) for b in trace.blocks if b.width)
    assert spent == pytest.approx(trace.budget_spent, rel=1e-9, abs=1e-9)


def test_explore_budget_examples():
    """B# on hand-evaluated inputs, clamped to B."""
    assert explore_budget(1e5, 1.0, 1.0, 10, 2) == pytest.approx(2.258e4, rel=1e-3)
    assert explore_budget(math.e, 1.0, 1.0, 1, 1) == pytest.approx(math.exp(2 / 3), rel=1e-9)
    assert explore_budget(50.0, 1.0, 1.0, 200, 1) == 50.0


def test_explore_budget_too_small():
    """ln B <= 0 has no exploration budget."""
    with pytest.raises(BudgetTooSmallError):
        explore_budget(1.0, 1.0, 1.0, 1, 1)


def test_ucb_offline_index():
    """0.5 + sqrt(ln B / lambda) with ln B = lambda = 100."""
    state = BanditState(2)
    state.update(np.zeros(100, dtype=int), np.tile([1.0, 0.0], 50))
    assert ucb_offline(state, 0, math.exp(100)) == pytest.approx(1.5)
    assert ucb_offline(state, 1, math.exp(100)) == math.inf


def test_ucb_online_index():
    """The bonus is sqrt((K+1) ln t / lambda) and vanishes as lambda grows."""
    state = BanditState(1)
    state.update(np.zeros(40, dtype=int), np.tile([1.0, 0.0], 20))
    assert ucb_online(state, 0, 50, 3) == pytest.approx(0.5 + math.sqrt(4 * math.log(50) / 40))
    state.update(np.zeros(400_000, dtype=int), np.tile([1.0, 0.0], 200_000))
    assert ucb_online(state, 0, 50, 3) == pytest.approx(0.5, abs=0.01)
    with pytest.raises(InvalidParameterError):
        ucb_online(state, 0, 50, 0)


def test_bandit_state_accounting():
    """Counts and sums add up per arm."""
    state = BanditState(3)
    state.update(np.array([0, 2, 2, 0, 2]), np.array([1, 0, 1, 1, 1]))
    np.testing.assert_array_equal(state.counts, [2, 0, 3])
    np.testing.assert_allclose(state.means, [1.0, 0.0, 2 / 3])
    assert state.total_pulls == 5
    clone = state.copy()
    clone.update(np.array([1]), np.array([1]))
    assert state.counts[1] == 0


def test_affordable_slots_is_exact_in_floats():
    """n * per_slot never exceeds the residual."""
    assert affordable_slots(10.0, 0.5625) == 17
    assert affordable_slots(0.9, 0.3) * 0.3 <= 0.9
    assert affordable_slots(0.1, 0.3) == 0


def test_budget_ledger():
    """The residual never goes negative."""
    ledger = BudgetLedger(2.0)
    ledger.charge(1.5)
    assert ledger.spent == 1.5
    with pytest.raises(InvalidParameterError):
        ledger.charge(1.0)
    residuals = BudgetLedger(1.0).charge_slots(0.25, 4)
    np.testing.assert_allclose(residuals, [0.75, 0.5, 0.25, 0.0])


def test_registry():
    """Config names resolve per mode; cmab has no on-line variant."""
    assert resolve_mechanism('caci', 'online') == 'caci_online'
    assert mechanism_mode('cmab_individual') == 'offline'
    with pytest.raises(ConfigError):
        resolve_mechanism('cmab', 'online')
    with pytest.raises(ConfigError):
        get_mechanism('nope')


def test_baseline_offline_hand_example(hand_pool, hand_config):
    """Worker 0 paid min(0.9 / 1.6, 1) = 0.5625 for floor(10 / 0.5625) = 17 slots."""
    trace = run_baseline_offline(hand_pool, hand_config, 10.0, np.random.default_rng(0))
    assert trace.slots_executed == 17
    events = trace.selections()
    assert set(events['worker_id']) == {0}
    np.testing.assert_allclose(events['payment'], 0.5625)
    assert trace.cumulative_reward_expected == pytest.approx(17 * 0.9)
    assert trace.residual == pytest.approx(10.0 - 17 * 0.5625)


def test_baseline_symmetric_pays_bids():
    """Identical workers: first K ids, paid their bids."""
    pool = make_pool(np.full(5, 0.6), np.full(5, 0.4))
    trace = run_baseline_offline(pool, MechanismConfig(k=2, b_min=0.2, b_max=1.0), 4.0, np.random.default_rng(0))
    events = trace.selections()
    assert set(events['worker_id']) == {0, 1}
    np.testing.assert_allclose(events['payment'], 0.4)


@pytest.mark.parametrize('mechanism_id', OFFLINE)
def test_offline_budget_safety(mechanism_id, small_pool, small_config):
    """Total payments stay within B, K selections per slot, exploration at b_max."""
    for budget in (0.0, 3.0, 57.3, 400.0):
        trace = _run(mechanism_id, small_pool, small_config, budget, seed=3)
        _check_budget_and_width(trace, small_config)


@pytest.mark.parametrize('mechanism_id', ONLINE)
def test_online_budget_safety(mechanism_id, small_stream, small_config):
    """Per-slot payments never overdraw the residual."""
    for budget in (0.5, 40.0, 250.0):
        trace = _run(mechanism_id, small_stream, small_config, budget, seed=3)
        _check_budget_and_width(trace, small_config)


@pytest.mark.parametrize('mechanism_id', OFFLINE)
def test_offline_payments_cover_bids(mechanism_id, small_pool, small_config):
    """Every payment is at least the winner's bid."""
    trace = _run(mechanism_id, small_pool, small_config, 300.0, seed=1)
    events = trace.selections()
    bids = small_pool.bids[small_pool.rows_of(events['worker_id'].to_numpy())]
    assert np.all(events['payment'].to_numpy() >= bids - 1e-12)


@pytest.mark.parametrize('mechanism_id', OFFLINE + ONLINE)
def test_determinism(mechanism_id, small_pool, small_stream, small_config):
    """Same population, config and seed give the same trace."""
    population = small_stream if mechanism_id in ONLINE else small_pool
    a = _run(mechanism_id, population, small_config, 200.0, seed=8).to_frame()
    b = _run(mechanism_id, population, small_config, 200.0, seed=8).to_frame()
    pd.testing.assert_frame_equal(a, b)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=0, max_value=2 ** 31),
    st.integers(min_value=1, max_value=4),
    st.floats(min_value=2.0, max_value=300.0),
    st.sampled_from(OFFLINE),
)
def test_offline_invariants_randomized(seed, k, budget, mechanism_id):
    """Budget safety and the pull-count identity over random instances."""
    rng = np.random.default_rng(seed)
    pool = generate_offline_pool(
        int(rng.integers(k + 1, 40)), 2, (0.2, 1.0), BumpField.random(2, rng), seed=seed, strategic=True
    )
    config = MechanismConfig(k=k, b_min=0.2, b_max=1.0, hoelder=HoelderParams(1.0, 1.0))
    trace = _run(mechanism_id, pool, config, budget, seed)
    _check_budget_and_width(trace, config)
    explored = trace.phase_slots('exploration') * k
    assert explored == int((trace.selections()['phase'] == 'exploration').sum())
    if 'explore_slots' in trace.params:
        assert trace.phase_slots('exploration') == trace.params['explore_slots']


def test_caci_single_cube_ranks_by_bid(small_pool):
    """With d = 1 every worker shares one index, so exploitation picks the lowest bids."""
    config = MechanismConfig(k=3, b_min=0.2, b_max=1.0, granularity=1)
    trace = run_caci_offline(small_pool, config, 300.0, np.random.default_rng(2))
    exploit = trace.selections()
    exploit = exploit[exploit['phase'] == 'exploitation']
    cheapest = set(small_pool.ids[np.argsort(small_pool.bids, kind='stable')[:3]])
    assert set(exploit['worker_id']) == cheapest
    assert trace.params['cells'] == 1


@pytest.mark.parametrize('seed', range(5))
def test_cmab_is_caci_with_one_worker_per_cube(seed):
    """A one-worker-per-cube grid turns off-line CACI into the per-worker bandit."""
    rng = np.random.default_rng(seed)
    n = 12
    contexts = ((rng.permutation(n) + 0.5) / n).reshape(-1, 1)
    pool = make_pool(rng.uniform(0.1, 0.9, n), rng.uniform(0.2, 1.0, n), contexts=contexts)
    config = MechanismConfig(k=2, b_min=0.2, b_max=1.0, granularity=n)
    caci = run_caci_offline(pool, config, 80.0, np.random.default_rng(seed))
    cmab = run_cmab_individual(pool, config, 80.0, np.random.default_rng(seed))
    pd.testing.assert_frame_equal(caci.to_frame(), cmab.to_frame())
    assert caci.params['explore_budget'] == cmab.params['explore_budget']


def test_cube_walk_follows_lowest_worker_row():
    """Occupied cubes are visited by their first worker row, not by cube id."""
    index = CubeIndex(np.array([5, 2, 5, 0, 2]), cells=8)
    np.testing.assert_array_equal(index.occupied, [0, 2, 5])
    np.testing.assert_array_equal(index.walk, [5, 2, 0])

    recorder = TraceRecorder('caci_offline', 10.0, 'walk')
    single = CubeIndex(np.array([3, 1, 2, 0]), cells=4)
    rows, cursor = pick_round_robin(single, 3, 0, np.random.default_rng(0), recorder)
    np.testing.assert_array_equal(rows, [0, 1, 2])
    rows, cursor = pick_round_robin(single, 3, cursor, np.random.default_rng(0), recorder)
    np.testing.assert_array_equal(rows, [3, 0, 1])
    assert cursor == 6


def test_cmab_is_caci_with_contexts_reversed_against_ids():
    """Worker 0 sits in the last cube: both bandits still explore in row order and agree."""
    n = 12
    rng = np.random.default_rng(3)
    contexts = ((np.arange(n)[::-1] + 0.5) / n).reshape(-1, 1)
    pool = make_pool(rng.uniform(0.1, 0.9, n), rng.uniform(0.2, 1.0, n), contexts=contexts)
    config = MechanismConfig(k=2, b_min=0.2, b_max=1.0, granularity=n)
    caci = run_caci_offline(pool, config, 80.0, np.random.default_rng(3))
    cmab = run_cmab_individual(pool, config, 80.0, np.random.default_rng(3))

    first = caci.selections()
    first = first[first['slot'] == 1]
    assert list(first['worker_id']) == [0, 1]
    pd.testing.assert_frame_equal(caci.to_frame(), cmab.to_frame())
    assert caci.cumulative_reward_expected == pytest.approx(cmab.cumulative_reward_expected)


def test_cmab_covers_every_worker_on_a_tiny_pool():
    """N=3 with a generous budget explores every worker."""
    pool = make_pool([0.9, 0.5, 0.2], [0.3, 0.5, 0.7])
    trace = run_cmab_individual(pool, MechanismConfig(k=1, b_min=0.2, b_max=1.0), 100.0, np.random.default_rng(0))
    explored = trace.selections()
    explored = explored[explored['phase'] == 'exploration']
    assert set(explored['worker_id']) == {0, 1, 2}


def test_cmab_exploration_can_eat_the_budget():
    """Many workers and a small budget: B# clamps to B and nothing is left to exploit."""
    rng = np.random.default_rng(0)
    pool = make_pool(rng.uniform(0.1, 0.9, 200), rng.uniform(0.2, 1.0, 200))
    trace = run_cmab_individual(pool, MechanismConfig(k=2, b_min=0.2, b_max=1.0), 50.0, np.random.default_rng(0))
    assert trace.params['explore_budget'] == 50.0
    assert trace.phase_slots('exploitation') == 0
    assert trace.residual == pytest.approx(0.0)


def test_epsilon_first_without_exploration(small_pool):
    """An epsilon too small to pay one slot exploits on 1 / bid."""
    config = MechanismConfig(k=3, b_min=0.2, b_max=1.0, epsilon=0.001)
    trace = run_epsilon_first(small_pool, config, 100.0, np.random.default_rng(0), mode='offline')
    assert trace.phase_slots('exploration') == 0
    assert any('no worker explored' in d for d in trace.diagnostics)
    chosen = set(trace.selections()['worker_id'])
    assert chosen == set(small_pool.ids[np.argsort(small_pool.bids, kind='stable')[:3]])


def test_epsilon_first_mode_mismatch(small_pool, small_config):
    """The on-line variant needs a stream."""
    with pytest.raises(ConfigError):
        run_epsilon_first(small_pool, small_config, 10.0, np.random.default_rng(0), mode='online')


def test_caci_online_identical_workers(constant_stream):
    """Single cube, equal workers: each slot pays the bid until K b_max is out of reach."""
    config = MechanismConfig(k=2, b_min=0.2, b_max=1.0, granularity=1)
    trace = run_caci_online(constant_stream, config, 20.0, np.random.default_rng(0))
    assert trace.phase_slots('init') == 1
    exploit = trace.selections()
    exploit = exploit[exploit['phase'] == 'exploitation']
    np.testing.assert_allclose(exploit['payment'], 0.5)
    assert trace.phase_slots('exploitation') == 18
    assert trace.residual == pytest.approx(1.0)
    assert any('residual budget' in d for d in trace.diagnostics)


def test_caci_online_initialization_covers_occupied_cubes(small_stream, small_config):
    """Slot 1 buys one worker per occupied cube at b_max."""
    trace = run_caci_online(small_stream, small_config, 500.0, np.random.default_rng(4))
    first = trace.blocks[0]
    assert first.phase == 'init'
    assert int(first.slots[0]) == 1
    assert first.width == trace.params['init_selections']
    assert first.width <= trace.params['cells']
