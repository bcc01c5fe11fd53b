"""Repeated seeded trials over a sweep axis, with regret and aggregation."""

from __future__ import annotations

import threading
from concurrent.futures import Executor, Future
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Callable, Sequence

import numpy as np
import pandas as pd

from ..exceptions import ConfigError
from ..mechanisms import MechanismConfig, resolve_mechanism
from ..population import Population, build_population
from ..tracer import ExperimentTrace
from .regret import compute_regret
from .trial import run_trial

if TYPE_CHECKING:
    from ..config import ExperimentConfig

RESULT_COLUMNS = [
    'mechanism',
    'axis',
    'axis_value',
    'trial',
    'cumulative_reward_realized',
    'cumulative_reward_expected',
    'regret_expected',
    'slots_executed',
    'budget_spent',
    'explore_budget',
    'd',
    'seed',
]
EXTRA_COLUMNS = ['regret_realized', 'budget', 'config_hash']

FailureCallback = Callable[[BaseException, dict], None]
ResultCallback = Callable[['TrialResult'], None]


@dataclass(frozen=True)
class MechanismEntry:
    """A mechanism as it appears in results: label, registry id and its epsilon."""

    label: str
    mechanism_id: str
    epsilon: float | None = None


@dataclass(frozen=True)
class TrialTask:
    """One (sweep point, trial) cell; every mechanism of the sweep runs on its population."""

    axis: str
    axis_value: float
    point_index: int
    trial: int
    seed: int
    population_seed: int
    budget: float
    n: int | None = None
    dim: int | None = None


@dataclass
class TrialResult:
    """One row of results.csv, optionally with the trace it was computed from."""

    mechanism: str
    axis: str
    axis_value: float
    trial: int
    cumulative_reward_realized: int
    cumulative_reward_expected: float
    regret_expected: float
    slots_executed: int
    budget_spent: float
    explore_budget: float
    d: int | None
    seed: int
    regret_realized: int
    budget: float
    config_hash: str | None
    entry_index: int = 0
    point_index: int = 0
    trace: ExperimentTrace | None = field(default=None, repr=False)

    @property
    def order_key(self) -> tuple[int, int, int]:
        return (self.entry_index, self.point_index, self.trial)

    def row(self) -> dict[str, Any]:
        return {name: getattr(self, name) for name in RESULT_COLUMNS + EXTRA_COLUMNS}


def _fmt(value: float) -> str:
    return f'{value:g}'


def expand_mechanisms(config: 'ExperimentConfig') -> list[MechanismEntry]:
    """Config names to result entries; eps_first expands into one entry per epsilon."""
    entries: list[MechanismEntry] = []
    for name in config.mechanisms:
        mechanism_id = resolve_mechanism(name, config.mode)
        if name != 'eps_first':
            entries.append(MechanismEntry(name, mechanism_id))
        elif config.sweep.axis == 'epsilon':
            entries.append(MechanismEntry('eps_first', mechanism_id))
        else:
            if not config.epsilons:
                raise ConfigError('epsilons', 'eps_first needs at least one epsilon')
            for eps in config.epsilons:
                entries.append(MechanismEntry(f'eps_first({_fmt(eps)})', mechanism_id, eps))
    return entries


def plan_trials(config: 'ExperimentConfig', seed: int | None = None) -> list[TrialTask]:
    """
    Every (point, trial) of the sweep.

    Trial seeds are seed + trial, so adding trials never changes earlier ones. The
    population is shared by all trials of a point unless resample_population is set.
    """
    seed = config.seed if seed is None else seed
    axis = config.sweep.axis if config.sweep.values else 'budget'
    points = config.axis_values
    if not points:
        raise ConfigError('sweep.values', 'nothing to run')

    tasks = []
    for p, value in enumerate(points):
        n = int(value) if axis == 'workers' else None
        dim = int(value) if axis == 'dimension' else None
        for trial in range(config.trials):
            population_seed = config.population_seed
            if config.resample_population:
                population_seed += trial
            tasks.append(TrialTask(
                axis=axis,
                axis_value=float(value),
                point_index=p,
                trial=trial,
                seed=seed + trial,
                population_seed=population_seed,
                budget=config.budget_at(value),
                n=n,
                dim=dim,
            ))
    return tasks


class PopulationCache:
    """Builds each distinct population once per sweep; safe to share between threads."""

    def __init__(self, config: 'ExperimentConfig') -> None:
        self.config = config
        self._lock = threading.Lock()
        self._items: dict[tuple, Population] = {}

    def get(self, task: TrialTask) -> Population:
        key = (task.population_seed, task.n, task.dim)
        with self._lock:
            if key not in self._items:
                self._items[key] = build_population(
                    self.config, seed=task.population_seed, n=task.n, dim=task.dim
                )
            return self._items[key]


def run_task(
    task: TrialTask,
    entries: Sequence[MechanismEntry],
    config: 'ExperimentConfig',
    populations: PopulationCache,
    keep_traces: bool = False,
    on_failure: FailureCallback | None = None,
) -> list[TrialResult]:
    """
    Run the baseline and every mechanism entry on the task's population.

    A failing mechanism is reported through on_failure (or raised when none is given)
    and the other entries still run.
    """
    base_config = MechanismConfig.from_experiment(config)
    config_hash = config.config_hash()
    context = {'axis': task.axis, 'axis_value': task.axis_value, 'trial': task.trial, 'seed': task.seed}

    def fail(error: BaseException, mechanism: str) -> None:
        if on_failure is None:
            raise error
        on_failure(error, {**context, 'mechanism': mechanism})

    try:
        population = populations.get(task)
        baseline_id = resolve_mechanism('baseline', config.mode)
        baseline = run_trial(baseline_id, population, base_config, task.budget, task.seed, config_hash)
    except Exception as e:
        for entry in entries:
            fail(e, entry.label)
        return []

    results = []
    for index, entry in enumerate(entries):
        try:
            mech_config = base_config
            epsilon = entry.epsilon
            if entry.mechanism_id.startswith('eps_first'):
                epsilon = task.axis_value if task.axis == 'epsilon' else epsilon
                mech_config = base_config.with_epsilon(float(epsilon))
            if entry.mechanism_id == baseline_id:
                trace = baseline
                trace.label = entry.label
            else:
                trace = run_trial(
                    entry.mechanism_id, population, mech_config, task.budget, task.seed,
                    config_hash, entry.label,
                )
            report = compute_regret(trace, baseline)
        except Exception as e:
            fail(e, entry.label)
            continue

        d = trace.params.get('d')
        results.append(TrialResult(
            mechanism=entry.label,
            axis=task.axis,
            axis_value=task.axis_value,
            trial=task.trial,
            cumulative_reward_realized=trace.cumulative_reward_realized,
            cumulative_reward_expected=trace.cumulative_reward_expected,
            regret_expected=report.regret,
            slots_executed=trace.slots_executed,
            budget_spent=trace.budget_spent,
            explore_budget=float(trace.params.get('explore_budget', 0.0)),
            d=int(d) if d is not None else None,
            seed=task.seed,
            regret_realized=report.realized_regret,
            budget=task.budget,
            config_hash=config_hash,
            entry_index=index,
            point_index=task.point_index,
            trace=trace if keep_traces else None,
        ))
    return results


def results_frame(results: Sequence[TrialResult]) -> pd.DataFrame:
    """Per-trial rows in (mechanism, point, trial) order."""
    ordered = sorted(results, key=lambda r: r.order_key)
    if not ordered:
        return pd.DataFrame(columns=RESULT_COLUMNS + EXTRA_COLUMNS)
    return pd.DataFrame([r.row() for r in ordered], columns=RESULT_COLUMNS + EXTRA_COLUMNS)


def aggregate(results: Sequence[TrialResult] | pd.DataFrame) -> pd.DataFrame:
    """Mean and standard deviation per (mechanism, axis value) over trials."""
    frame = results if isinstance(results, pd.DataFrame) else results_frame(results)
    if frame.empty:
        return pd.DataFrame()
    grouped = frame.groupby(['mechanism', 'axis', 'axis_value'], sort=False)
    table = grouped.agg(
        trials=('trial', 'count'),
        reward_expected_mean=('cumulative_reward_expected', 'mean'),
        reward_expected_std=('cumulative_reward_expected', 'std'),
        reward_realized_mean=('cumulative_reward_realized', 'mean'),
        regret_expected_mean=('regret_expected', 'mean'),
        regret_expected_std=('regret_expected', 'std'),
        regret_realized_mean=('regret_realized', 'mean'),
        slots_executed_mean=('slots_executed', 'mean'),
        budget_spent_mean=('budget_spent', 'mean'),
    ).reset_index()
    std_columns = ['reward_expected_std', 'regret_expected_std']
    table[std_columns] = table[std_columns].fillna(0.0)
    return table


@dataclass
class SweepResult:
    results: list[TrialResult]

    @property
    def frame(self) -> pd.DataFrame:
        return results_frame(self.results)

    @property
    def table(self) -> pd.DataFrame:
        return aggregate(self.results)

    def traces(self) -> list[ExperimentTrace]:
        return [r.trace for r in sorted(self.results, key=lambda r: r.order_key) if r.trace is not None]


def sweep(
    axis: str,
    points: Sequence[float],
    trials: int,
    mechanisms: Sequence[str],
    base_config: 'ExperimentConfig',
    seed: int,
    executor: Executor | None = None,
    keep_traces: bool = False,
    on_result: ResultCallback | None = None,
    on_failure: FailureCallback | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> SweepResult:
    """
    Run every mechanism for trials seeded repeats at every point of one axis.

    Tasks go to executor when one is given; results are ordered by (mechanism, point,
    trial) regardless of completion order.
    """
    if trials < 1:
        raise ConfigError('trials', 'must be >= 1')
    if not points:
        raise ConfigError('sweep.values', 'points must be non-empty')
    config = replace(
        base_config,
        mechanisms=list(mechanisms),
        trials=trials,
        seed=seed,
        sweep=replace(base_config.sweep, axis=axis, values=[float(p) for p in points]),
    )
    entries = expand_mechanisms(config)
    tasks = plan_trials(config, seed)
    populations = PopulationCache(config)
    results: list[TrialResult] = []

    def collect(batch: list[TrialResult]) -> None:
        results.extend(batch)
        if on_result is not None:
            for result in batch:
                on_result(result)

    if executor is None:
        for task in tasks:
            if should_stop is not None and should_stop():
                break
            collect(run_task(task, entries, config, populations, keep_traces, on_failure))
        return SweepResult(results)

    futures: list[Future] = [
        executor.submit(run_task, task, entries, config, populations, keep_traces, on_failure)
        for task in tasks
    ]
    for future in futures:
        if should_stop is not None and should_stop():
            for pending in futures:
                pending.cancel()
        if future.cancelled():
            continue
        collect(future.result())
    return SweepResult(results)


def mean_of(frame: pd.DataFrame, mechanism: str, column: str) -> np.ndarray:
    """Per-point means of a results column for one mechanism, in point order."""
    rows = frame[frame['mechanism'] == mechanism]
    return rows.groupby('axis_value', sort=True)[column].mean().to_numpy()
