"""Experiment orchestration: trials, regret and sweeps."""

from .trial import run_trial
from .regret import RegretReport, analytic_baseline_reward, compute_regret
from .sweep import (
    EXTRA_COLUMNS,
    RESULT_COLUMNS,
    MechanismEntry,
    PopulationCache,
    SweepResult,
    TrialResult,
    TrialTask,
    aggregate,
    expand_mechanisms,
    mean_of,
    plan_trials,
    results_frame,
    run_task,
    sweep,
)

__all__ = [
    'run_trial',
    'RegretReport',
    'compute_regret',
    'analytic_baseline_reward',
    'RESULT_COLUMNS',
    'EXTRA_COLUMNS',
    'MechanismEntry',
    'PopulationCache',
    'SweepResult',
    'TrialResult',
    'TrialTask',
    'aggregate',
    'expand_mechanisms',
    'mean_of',
    'plan_trials',
    'results_frame',
    'run_task',
    'sweep',
]
