"""Tests for trials, regret, traces and sweeps."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd
import pytest

from caci_bench.config import config_from_dict
from caci_bench.exceptions import ConfigError, PopulationMismatchError
from caci_bench.mechanisms import MECHANISMS, MechanismConfig
from caci_bench.population import build_population
from caci_bench.simulation import (
    RESULT_COLUMNS,
    aggregate,
    analytic_baseline_reward,
    compute_regret,
    expand_mechanisms,
    plan_trials,
    run_trial,
    sweep,
)
from caci_bench.tracer import TraceRecorder

from conftest import small_config_dict


def test_run_trial_is_deterministic(small_pool, small_config):
    """Same mechanism, population, config and seed: identical traces."""
    a = run_trial('caci_offline', small_pool, small_config, 150.0, seed=4, config_hash='abc')
    b = run_trial('caci_offline', small_pool, small_config, 150.0, seed=4, config_hash='abc')
    pd.testing.assert_frame_equal(a.to_frame(), b.to_frame())
    assert a.seed == 4 and a.config_hash == 'abc'


def test_run_trial_mode_mismatch(small_pool, small_stream, small_config):
    """Off-line mechanisms need a pool and on-line ones a stream."""
    with pytest.raises(ConfigError):
        run_trial('cmab_individual', small_stream, small_config, 100.0, seed=0)
    with pytest.raises(ConfigError):
        run_trial('caci_online', small_pool, small_config, 100.0, seed=0)


def test_zero_budget_gives_empty_trace(small_pool, small_config):
    """Nothing is bought with B = 0."""
    for mechanism_id in ('baseline_offline', 'caci_offline'):
        trace = run_trial(mechanism_id, small_pool, small_config, 0.0, seed=0)
        assert trace.slot_count == 0
        assert trace.cumulative_reward_expected == 0.0


def test_baseline_trial_matches_hand_example(hand_pool, hand_config):
    """run_trial reproduces the 17-slot hand simulation."""
    trace = run_trial('baseline_offline', hand_pool, hand_config, 10.0, seed=0)
    assert trace.slots_executed == 17
    assert analytic_baseline_reward(hand_pool, hand_config, 10.0) == pytest.approx(17 * 0.9)


def test_analytic_baseline_reward(small_pool, small_config):
    """The closed form equals the simulated expected reward."""
    for budget in (10.0, 123.4, 500.0):
        trace = run_trial('baseline_offline', small_pool, small_config, budget, seed=1)
        assert trace.cumulative_reward_expected == pytest.approx(
            analytic_baseline_reward(small_pool, small_config, budget)
        )


def test_regret_against_itself_is_zero(small_pool, small_config):
    """The baseline has zero regret against itself."""
    baseline = run_trial('baseline_offline', small_pool, small_config, 200.0, seed=3)
    report = compute_regret(baseline, baseline)
    assert report.regret == 0.0
    assert np.all(report.regret_series == 0.0)


def test_regret_is_reward_gap(small_pool, small_config):
    """regret = baseline reward - mechanism reward, and its series ends at that value."""
    baseline = run_trial('baseline_offline', small_pool, small_config, 200.0, seed=3)
    caci = run_trial('caci_offline', small_pool, small_config, 200.0, seed=3)
    report = compute_regret(caci, baseline)
    assert report.regret == pytest.approx(
        baseline.cumulative_reward_expected - caci.cumulative_reward_expected
    )
    assert report.regret_series[-1] == pytest.approx(report.regret)
    assert report.realized_regret == baseline.cumulative_reward_realized - caci.cumulative_reward_realized


def test_regret_population_mismatch(small_pool, small_config, hand_pool, hand_config):
    """Traces from different populations cannot be compared."""
    a = run_trial('baseline_offline', small_pool, small_config, 10.0, seed=0)
    b = run_trial('baseline_offline', hand_pool, hand_config, 10.0, seed=0)
    with pytest.raises(PopulationMismatchError):
        compute_regret(a, b)


def test_trace_views(hand_pool, hand_config):
    """Selections, series and the CSV frame agree with each other."""
    trace = run_trial('baseline_offline', hand_pool, hand_config, 10.0, seed=0)
    frame = trace.to_frame()
    assert len(frame) == 17
    assert list(frame['slot']) == list(range(1, 18))
    assert frame['cumulative_reward_expected'].iloc[-1] == pytest.approx(trace.cumulative_reward_expected)
    assert frame['cumulative_reward_realized'].iloc[-1] == trace.cumulative_reward_realized
    assert len(trace.selections()) == trace.selection_count == 17
    assert trace.summary()['slots_executed'] == 17


def test_recorder_merges_skipped_slots():
    """Consecutive idle slots collapse into one block."""
    recorder = TraceRecorder('x', 5.0, 'fp')
    recorder.skip_slot(1, 5.0, 'idle')
    recorder.skip_slot(2, 5.0, 'idle')
    recorder.record_slot('exploitation', 3, np.array([7]), np.array([1.0]), np.array([1]), np.array([0.5]), 4.0)
    trace = recorder.finish(4.0)
    assert [b.phase for b in trace.blocks] == ['skipped', 'exploitation']
    assert trace.slot_count == 3
    assert trace.slots_executed == 1
    assert trace.diagnostics == ['idle']


def test_expand_mechanisms_labels():
    """eps_first becomes one entry per epsilon."""
    data = small_config_dict(epsilons=[0.3, 0.5])
    labels = [e.label for e in expand_mechanisms(config_from_dict(data))]
    assert labels == ['baseline', 'caci', 'eps_first(0.3)', 'eps_first(0.5)']


def test_plan_trials_seeds(experiment):
    """Trial seeds are seed + trial at every point."""
    tasks = plan_trials(experiment)
    assert len(tasks) == 4
    assert [t.seed for t in tasks] == [11, 12, 11, 12]
    assert [t.budget for t in tasks] == [200.0, 200.0, 400.0, 400.0]


def _sweep(config, **kwargs):
    return sweep(
        axis=config.sweep.axis,
        points=config.sweep.values,
        trials=config.trials,
        mechanisms=config.mechanisms,
        base_config=config,
        seed=config.seed,
        **kwargs,
    )


def test_single_point_sweep_equals_trial():
    """One point, one trial: the row is run_trial plus compute_regret."""
    config = config_from_dict(small_config_dict(sweep={'axis': 'budget', 'values': [300]}, trials=1))
    result = _sweep(config)
    row = result.frame.set_index('mechanism').loc['caci']

    pool = build_population(config)
    mech_config = MechanismConfig.from_experiment(config)
    caci = run_trial('caci_offline', pool, mech_config, 300.0, seed=11)
    baseline = run_trial('baseline_offline', pool, mech_config, 300.0, seed=11)
    assert row['cumulative_reward_expected'] == pytest.approx(caci.cumulative_reward_expected)
    assert row['regret_expected'] == pytest.approx(compute_regret(caci, baseline).regret)


def test_sweep_order_and_columns(experiment):
    """Rows come in (mechanism, point, trial) order with the documented columns."""
    frame = _sweep(experiment).frame
    assert list(frame.columns[:len(RESULT_COLUMNS)]) == RESULT_COLUMNS
    assert list(frame['mechanism'].unique()) == ['baseline', 'caci', 'eps_first(0.3)']
    first = frame[frame['mechanism'] == 'caci']
    assert list(zip(first['axis_value'], first['trial'])) == [(200.0, 0), (200.0, 1), (400.0, 0), (400.0, 1)]
    assert np.all(frame[frame['mechanism'] == 'baseline']['regret_expected'] == 0.0)


def test_threaded_sweep_matches_sequential(experiment):
    """A thread pool changes nothing in the results."""
    sequential = _sweep(experiment).frame
    with ThreadPoolExecutor(max_workers=3) as executor:
        threaded = _sweep(experiment, executor=executor).frame
    pd.testing.assert_frame_equal(sequential, threaded)


def test_aggregate_statistics():
    """Means lie within the trial range and standard deviations are finite."""
    config = config_from_dict(small_config_dict(trials=5, sweep={'axis': 'budget', 'values': [300]}))
    result = _sweep(config)
    table = aggregate(result.results)
    frame = result.frame
    for _, row in table.iterrows():
        values = frame[frame['mechanism'] == row['mechanism']]['cumulative_reward_expected']
        assert values.min() - 1e-9 <= row['reward_expected_mean'] <= values.max() + 1e-9
        assert np.isfinite(row['reward_expected_std'])
        assert row['trials'] == 5


def test_failing_mechanism_is_isolated(experiment, monkeypatch):
    """A mechanism that raises is reported and the others still produce rows."""

    def broken(population, config, budget, rng):
        raise RuntimeError('boom')

    monkeypatch.setitem(MECHANISMS, 'caci_offline', broken)
    failures = []
    result = _sweep(experiment, on_failure=lambda e, ctx: failures.append((e, ctx)))
    assert len(failures) == 4
    assert all(ctx['mechanism'] == 'caci' for _, ctx in failures)
    assert 'caci' not in set(result.frame['mechanism'])
    assert len(result.frame) == 8


def test_sweep_stops_when_asked(experiment):
    """should_stop ends the sweep before new tasks start."""
    result = _sweep(experiment, should_stop=lambda: True)
    assert result.results == []


def test_workers_axis_sweep():
    """A workers sweep rebuilds the population at each count."""
    data = small_config_dict(
        sweep={'axis': 'workers', 'values': [20, 40]}, budget=150, trials=1, mechanisms=['baseline', 'caci']
    )
    frame = _sweep(config_from_dict(data)).frame
    assert sorted(frame['axis_value'].unique()) == [20.0, 40.0]
    assert set(frame['budget']) == {150.0}


def test_online_sweep():
    """On-line configs sweep the stream mechanisms."""
    data = small_config_dict(
        mode='online',
        population={'type': 'synthetic', 'workers_per_slot': 12, 'dim': 2, 'quality': {'type': 'bump'}},
        horizon=100,
        trials=1,
    )
    frame = _sweep(config_from_dict(data)).frame
    assert set(frame['mechanism']) == {'baseline', 'caci', 'eps_first(0.3)'}
    assert np.all(frame['budget_spent'] <= frame['budget'] + 1e-9)
