"""
CACI Bench

Simulator for budget-limited crowdsensing incentive mechanisms that learn worker
quality over a partitioned context space while paying truthful second-price rewards.

Usage:
    import caci_bench

    config = caci_bench.load_config('fig2-synthetic')
    result = caci_bench.run_experiment(config, output_dir='out')
    print(result.table)
"""

from __future__ import annotations

from .config import BenchSettings, ExperimentConfig, config_from_dict, list_presets, load_config
from .context_space import (
    ContextVector,
    HoelderParams,
    PartitionGrid,
    compute_granularity,
    delta_bound,
    locate,
    locate_many,
)
from .auction import ScoredWorker, SelectionOutcome, rank_by_ratio, select_and_price, select_top_k
from .mechanisms import MECHANISMS, MechanismConfig, get_mechanism
from .population import ArrivalProcess, OfflinePool, build_population
from .runner import BenchRunner
from .simulation import SweepResult, analytic_baseline_reward, compute_regret, run_trial, sweep
from .tracer import ExperimentTrace

__version__ = '0.1.0'

__all__ = [
    '__version__',
    'BenchSettings',
    'ExperimentConfig',
    'config_from_dict',
    'list_presets',
    'load_config',
    'ContextVector',
    'HoelderParams',
    'PartitionGrid',
    'compute_granularity',
    'delta_bound',
    'locate',
    'locate_many',
    'ScoredWorker',
    'SelectionOutcome',
    'rank_by_ratio',
    'select_and_price',
    'select_top_k',
    'MECHANISMS',
    'MechanismConfig',
    'get_mechanism',
    'ArrivalProcess',
    'OfflinePool',
    'build_population',
    'BenchRunner',
    'ExperimentTrace',
    'SweepResult',
    'analytic_baseline_reward',
    'compute_regret',
    'run_trial',
    'sweep',
    'run_experiment',
]


def run_experiment(
    config: ExperimentConfig,
    output_dir: str | None = None,
    jobs: int | None = None,
    emit_traces: bool | None = None,
    debug: bool | None = None,
) -> SweepResult:
    """
    Run a config end to end and write its output files.

    Args:
        config: Validated experiment config (see load_config)
        output_dir: Output directory (or set CACI_BENCH_OUT)
        jobs: Parallel trial threads (or set CACI_BENCH_JOBS)
        emit_traces: Also write one trace CSV per trial (or set CACI_BENCH_TRACES)
        debug: Print per-trial progress (or set CACI_BENCH_DEBUG)
    """
    settings = BenchSettings(output_dir=output_dir, jobs=jobs, emit_traces=emit_traces, debug=debug)
    return BenchRunner(config, settings).run()
