"""
Command-line front end.

    caci-bench run <config> [--seed N] [--jobs N] [--out DIR] [--emit-traces]
    caci-bench probe <config> --worker ID --grid LO:HI:N [--mechanism NAME]
    caci-bench validate <config>

<config> is a JSON file or the name of a shipped preset. Exit codes: 0 success,
2 configuration error (nothing is written), 3 runtime error or failed trials.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import __version__
from .config import BenchSettings, ExperimentConfig, list_presets, load_config
from .exceptions import CaciBenchError, ConfigError, DatasetError, InvalidParameterError
from .mechanisms import MechanismConfig, affordable_slots, explore_budget, resolve_mechanism
from .output import ResultWriter
from .population import build_population
from .runner import BenchRunner
from .simulation import run_trial
from .verification import audit_individual_rationality, parse_grid, probe_truthfulness

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # Subcommands repeat the flags without defaults so either position works
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument('--seed', type=int, default=default, help='override the config seed')
    parser.add_argument('--jobs', type=int, default=default, help='parallel trial threads')
    parser.add_argument('--out', default=default, help='output directory (env CACI_BENCH_OUT)')
    parser.add_argument(
        '--emit-traces', action='store_true', default=default, help='write per-trial trace CSVs'
    )
    parser.add_argument('--debug', action='store_true', default=default, help='verbose progress')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='caci-bench',
        description='Simulate budget-limited crowdsensing incentive mechanisms.',
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    _add_global_flags(parser, suppress=False)
    commands = parser.add_subparsers(dest='command', required=True)

    presets = ', '.join(list_presets()) or 'none'
    config_help = f'config file or preset name ({presets})'

    run = commands.add_parser('run', help='run a sweep and write results')
    run.add_argument('config', help=config_help)
    _add_global_flags(run, suppress=True)

    probe = commands.add_parser('probe', help='sweep one worker\'s bid and record its utility')
    probe.add_argument('config', help=config_help)
    probe.add_argument('--worker', type=int, default=None, help='worker id to probe')
    probe.add_argument('--grid', default=None, help='bid grid lo:hi:n')
    probe.add_argument('--mechanism', default=None, help='mechanism name (default: first learning one)')
    probe.add_argument('--budget', type=float, default=None, help='budget for the probed runs')
    _add_global_flags(probe, suppress=True)

    validate = commands.add_parser('validate', help='check a config and print the derived grid')
    validate.add_argument('config', help=config_help)
    _add_global_flags(validate, suppress=True)
    return parser


def _settings(args: argparse.Namespace) -> BenchSettings:
    return BenchSettings(
        output_dir=args.out,
        jobs=args.jobs,
        seed=args.seed,
        emit_traces=True if args.emit_traces else None,
        debug=True if args.debug else None,
    )


def _check_population(config: ExperimentConfig) -> None:
    """CSV populations are parsed up front so dataset errors are configuration errors."""
    if config.population.type == 'csv':
        build_population(config)


def cmd_run(args: argparse.Namespace) -> int:
    settings = _settings(args)
    config = load_config(args.config, seed=settings.seed)
    _check_population(config)

    runner = BenchRunner(config, settings)
    runner.run()

    if runner.failure_count:
        print(f'[CACI Bench] {runner.failure_count} trial(s) failed; see failures.jsonl')
        return EXIT_RUNTIME
    if runner.interrupted:
        print('[CACI Bench] Run interrupted; partial results were written')
        return EXIT_RUNTIME
    return EXIT_OK


def _probe_budget(config: ExperimentConfig, override: float | None) -> float:
    for budget in (override, config.probe.budget, config.budget):
        if budget is not None:
            return float(budget)
    if config.sweep.axis == 'budget' and config.sweep.values:
        return float(config.sweep.values[-1])
    raise ConfigError('probe.budget', 'no budget to probe with')


def _probe_mechanism(config: ExperimentConfig, override: str | None) -> str:
    if override is not None:
        return resolve_mechanism(override, config.mode)
    learning = [m for m in config.mechanisms if m != 'baseline']
    return resolve_mechanism(learning[0] if learning else 'baseline', config.mode)


def cmd_probe(args: argparse.Namespace) -> int:
    settings = _settings(args)
    config = load_config(args.config, seed=settings.seed)

    worker = args.worker if args.worker is not None else config.probe.worker
    if worker is None:
        raise ConfigError('probe.worker', 'pass --worker or set probe.worker')
    grid = parse_grid(args.grid or config.probe.grid)
    budget = _probe_budget(config, args.budget)
    mechanism_id = _probe_mechanism(config, args.mechanism)
    mech_config = MechanismConfig.from_experiment(config)
    population = build_population(config)

    print(f'[CACI Bench] Probing worker {worker} under {mechanism_id} over {grid.size} bid(s), B={budget:g}')
    result = probe_truthfulness(mechanism_id, population, mech_config, worker, grid, config.seed, budget)

    truthful_trace = run_trial(mechanism_id, population, mech_config, budget, config.seed)
    audit = audit_individual_rationality(truthful_trace, population)

    path = ResultWriter(settings).write_probe(result.to_frame())
    critical = 'none' if result.critical_payment is None else f'{result.critical_payment:.6g}'
    print(
        f'[CACI Bench] true cost {result.true_cost:.6g}, truthful utility '
        f'{result.truthful_utility:.6g}, critical bid {critical}, max gain {result.max_gain:.3g}'
    )
    print(f'[CACI Bench] individual rationality: {len(audit.violations)} violation(s) in {audit.checked} payment(s)')
    print(f'[CACI Bench] Wrote {path}')
    return EXIT_OK


def _dimension_at(config: ExperimentConfig, value: float) -> int:
    return int(value) if config.sweep.axis == 'dimension' and config.sweep.values else config.population.dim


def cmd_validate(args: argparse.Namespace) -> int:
    settings = _settings(args)
    config = load_config(args.config, seed=settings.seed)
    _check_population(config)
    mech_config = MechanismConfig.from_experiment(config)
    k, b_max = config.auction.k, config.auction.b_max

    print(f'[CACI Bench] {config.source or args.config}: valid (hash {config.config_hash()})')
    for value in config.axis_values:
        budget = config.budget_at(value)
        dim = _dimension_at(config, value)
        d = mech_config.granularity_for(budget, dim)
        b_sharp = explore_budget(budget, b_max, config.auction.mu_max, d, dim)
        slots = affordable_slots(b_sharp, k * b_max)
        point = f'{config.sweep.axis}={value:g}' if config.sweep.values else f'budget={budget:g}'
        print(
            f'[CACI Bench] {point}: d={d}, d^M={d ** dim}, B#={b_sharp:.6g}, '
            f'exploration slots={slots}'
        )
    if config.mode == 'online':
        print('[CACI Bench] on-line mechanisms do not reserve B#; the figures above are for reference')
    return EXIT_OK


COMMANDS = {
    'run': cmd_run,
    'probe': cmd_probe,
    'validate': cmd_validate,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DatasetError, InvalidParameterError) as e:
        print(f'[CACI Bench] Invalid configuration: {e}', file=sys.stderr)
        return EXIT_CONFIG
    except CaciBenchError as e:
        print(f'[CACI Bench] Error: {e}', file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as e:
        print(f'[CACI Bench] Unexpected error: {type(e).__name__}: {e}', file=sys.stderr)
        if args.debug:
            raise
        return EXIT_RUNTIME


__all__ = ['main', 'build_parser', 'cmd_run', 'cmd_probe', 'cmd_validate', 'EXIT_OK', 'EXIT_CONFIG', 'EXIT_RUNTIME']
