"""Bench settings and experiment configuration management."""

from __future__ import annotations

import hashlib
import json
import math
import os
import platform
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, TypeVar

from .exceptions import ConfigError

T = TypeVar('T')

MODES = ('offline', 'online')
MECHANISM_NAMES = ('baseline', 'caci', 'cmab', 'eps_first')
POPULATION_TYPES = ('synthetic', 'csv')
QUALITY_TYPES = ('bump', 'trajectory', 'constant', 'table')
SWEEP_AXES = ('budget', 'workers', 'epsilon', 'dimension')

# Descriptive names accepted for the shipped presets
PRESET_ALIASES = {
    'offline-budget-synthetic': 'fig2-synthetic',
    'truthfulness-probe': 'fig3-truthfulness',
    'offline-workers-synthetic': 'fig4-workers-synthetic',
    'offline-budget-trajectory': 'fig5-trajectory',
    'online-budget-synthetic': 'fig9-online-synthetic',
    'online-budget-trajectory': 'fig10-online-trajectory',
}


def _env_flag(name: str, default: str = 'false') -> bool:
    return os.environ.get(name, default).lower() in ('1', 'true', 'yes')


@dataclass
class BenchSettings:
    """Process-level settings; None fields fall back to environment variables."""

    output_dir: str | None = None
    jobs: int | None = None
    seed: int | None = None
    emit_traces: bool | None = None
    debug: bool | None = None

    def __post_init__(self) -> None:
        """Apply defaults from environment variables."""
        self.output_dir = self.output_dir or os.environ.get('CACI_BENCH_OUT', 'caci-out')
        self.jobs = self.jobs if self.jobs is not None else int(os.environ.get('CACI_BENCH_JOBS', '1'))
        if self.seed is None and os.environ.get('CACI_BENCH_SEED'):
            self.seed = int(os.environ['CACI_BENCH_SEED'])
        self.emit_traces = self.emit_traces if self.emit_traces is not None else _env_flag('CACI_BENCH_TRACES')
        self.debug = self.debug if self.debug is not None else _env_flag('CACI_BENCH_DEBUG')
        self.jobs = max(1, self.jobs)

    def get_runtime_info(self) -> dict[str, Any]:
        """Get Python runtime information."""
        import numpy

        return {
            'runtime': 'python',
            'runtime_version': platform.python_version(),
            'numpy_version': numpy.__version__,
            'platform': sys.platform,
            'implementation': platform.python_implementation(),
        }


@dataclass
class QualitySpec:
    type: str = 'bump'
    sigma: float = 1.0
    L: float = 1.0
    alpha: float = 1.0
    bumps: int = 8
    width: float = 0.15
    low: float = 0.05
    high: float = 0.95
    value: float = 0.5
    values: list[Any] | None = None


@dataclass
class PopulationSpec:
    type: str = 'synthetic'
    n: int = 1000
    workers_per_slot: int = 200
    csv_path: str | None = None
    cost_min: float = 0.2
    cost_max: float = 1.0
    dim: int = 2
    strategic_bids: bool = False
    repeat_ids: bool = False
    pool_size: int | None = None
    seed: int | None = None
    quality: QualitySpec = field(default_factory=QualitySpec)
    context_columns: list[str] | None = None
    truthful: bool = True


@dataclass
class AuctionSpec:
    k: int = 10
    b_min: float = 0.2
    b_max: float = 1.0
    mu_max: float = 1.0
    granularity: int | None = None


@dataclass
class SweepSpec:
    axis: str = 'budget'
    values: list[float] = field(default_factory=list)


@dataclass
class ProbeSpec:
    worker: int | None = None
    grid: str = '0.2:1.0:100'
    budget: float | None = None


@dataclass
class ExperimentConfig:
    """Resolved, validated experiment description."""

    mode: str = 'offline'
    mechanisms: list[str] = field(default_factory=lambda: ['baseline', 'caci'])
    population: PopulationSpec = field(default_factory=PopulationSpec)
    auction: AuctionSpec = field(default_factory=AuctionSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    epsilons: list[float] = field(default_factory=lambda: [0.3, 0.5])
    trials: int = 1
    seed: int = 0
    budget: float | None = None
    resample_population: bool = False
    horizon: int | None = None
    probe: ProbeSpec = field(default_factory=ProbeSpec)
    source: str | None = None

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        data = asdict(self)
        data.pop('source', None)
        return data

    def config_hash(self) -> str:
        """Fingerprint of the resolved configuration."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode()).hexdigest()[:16]

    @property
    def population_seed(self) -> int:
        return self.population.seed if self.population.seed is not None else self.seed

    @property
    def axis_values(self) -> list[float]:
        """Sweep points, or the single configured budget."""
        if self.sweep.values:
            return list(self.sweep.values)
        return [self.budget] if self.budget is not None else []

    def budget_at(self, axis_value: float) -> float:
        if self.sweep.axis == 'budget' and self.sweep.values:
            return float(axis_value)
        if self.budget is None:
            raise ConfigError('budget', f'required when sweeping over {self.sweep.axis!r}')
        return float(self.budget)


class _Reader:
    """Pulls typed fields out of a nested JSON object, tracking the dotted path."""

    def __init__(self, data: Any, path: str) -> None:
        if not isinstance(data, dict):
            raise ConfigError(path, 'expected an object')
        self.data = dict(data)
        self.path = path

    def _at(self, key: str) -> str:
        return f'{self.path}.{key}' if self.path else key

    def take(self, key: str, kind: Callable[[Any, str], T], default: T) -> T:
        if key not in self.data:
            return default
        return kind(self.data.pop(key), self._at(key))

    def child(self, key: str) -> _Reader:
        return _Reader(self.data.pop(key, {}), self._at(key))

    def finish(self) -> None:
        if self.data:
            unknown = sorted(self.data)[0]
            raise ConfigError(self._at(unknown), 'unknown key')


def _int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        raise ConfigError(path, f'expected an integer, got {value!r}')
    return int(value)


def _float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(path, f'expected a finite number, got {value!r}')
    return float(value)


def _bool(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(path, f'expected true or false, got {value!r}')
    return value


def _str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigError(path, f'expected a string, got {value!r}')
    return value


def _optional(kind: Callable[[Any, str], T]) -> Callable[[Any, str], T | None]:
    def read(value: Any, path: str) -> T | None:
        return None if value is None else kind(value, path)
    return read


def _list(kind: Callable[[Any, str], T]) -> Callable[[Any, str], list[T]]:
    def read(value: Any, path: str) -> list[T]:
        if not isinstance(value, list):
            raise ConfigError(path, f'expected a list, got {value!r}')
        return [kind(item, f'{path}[{i}]') for i, item in enumerate(value)]
    return read


def _choice(options: tuple[str, ...]) -> Callable[[Any, str], str]:
    def read(value: Any, path: str) -> str:
        value = _str(value, path)
        if value not in options:
            raise ConfigError(path, f'expected one of {", ".join(options)}, got {value!r}')
        return value
    return read


def _raw(value: Any, path: str) -> Any:
    return value


def _read_quality(reader: _Reader) -> QualitySpec:
    d = QualitySpec()
    spec = QualitySpec(
        type=reader.take('type', _choice(QUALITY_TYPES), d.type),
        sigma=reader.take('sigma', _float, d.sigma),
        L=reader.take('L', _float, d.L),
        alpha=reader.take('alpha', _float, d.alpha),
        bumps=reader.take('bumps', _int, d.bumps),
        width=reader.take('width', _float, d.width),
        low=reader.take('low', _float, d.low),
        high=reader.take('high', _float, d.high),
        value=reader.take('value', _float, d.value),
        values=reader.take('values', _optional(_raw), d.values),
    )
    reader.finish()
    return spec


def _read_population(reader: _Reader) -> PopulationSpec:
    d = PopulationSpec()
    quality = _read_quality(reader.child('quality'))
    schema = reader.child('schema')
    spec = PopulationSpec(
        type=reader.take('type', _choice(POPULATION_TYPES), d.type),
        n=reader.take('n', _int, d.n),
        workers_per_slot=reader.take('workers_per_slot', _int, d.workers_per_slot),
        csv_path=reader.take('csv_path', _optional(_str), d.csv_path),
        cost_min=reader.take('cost_min', _float, d.cost_min),
        cost_max=reader.take('cost_max', _float, d.cost_max),
        dim=reader.take('dim', _int, d.dim),
        strategic_bids=reader.take('strategic_bids', _bool, d.strategic_bids),
        repeat_ids=reader.take('repeat_ids', _bool, d.repeat_ids),
        pool_size=reader.take('pool_size', _optional(_int), d.pool_size),
        seed=reader.take('seed', _optional(_int), d.seed),
        quality=quality,
        context_columns=schema.take('context_columns', _optional(_list(_str)), d.context_columns),
        truthful=schema.take('truthful', _bool, d.truthful),
    )
    schema.finish()
    reader.finish()
    return spec


def _read_auction(reader: _Reader) -> AuctionSpec:
    d = AuctionSpec()
    spec = AuctionSpec(
        k=reader.take('k', _int, d.k),
        b_min=reader.take('b_min', _float, d.b_min),
        b_max=reader.take('b_max', _float, d.b_max),
        mu_max=reader.take('mu_max', _float, d.mu_max),
        granularity=reader.take('granularity', _optional(_int), d.granularity),
    )
    reader.finish()
    return spec


def _validate(config: ExperimentConfig) -> None:
    pop, auction, quality = config.population, config.auction, config.population.quality

    if not config.mechanisms:
        raise ConfigError('mechanisms', 'at least one mechanism is required')
    for i, name in enumerate(config.mechanisms):
        if name not in MECHANISM_NAMES:
            raise ConfigError(f'mechanisms[{i}]', f'expected one of {", ".join(MECHANISM_NAMES)}, got {name!r}')
    if config.mode == 'online' and 'cmab' in config.mechanisms:
        raise ConfigError('mechanisms', 'cmab learns individual workers and has no on-line variant')

    if auction.k < 1:
        raise ConfigError('auction.k', 'must be >= 1')
    if not auction.b_min > 0:
        raise ConfigError('auction.b_min', 'must be > 0')
    if auction.b_max < auction.b_min:
        raise ConfigError('auction.b_max', 'must be >= auction.b_min')
    if not (0 < auction.mu_max <= 1):
        raise ConfigError('auction.mu_max', 'must lie in (0, 1]')
    if auction.granularity is not None and auction.granularity < 1:
        raise ConfigError('auction.granularity', 'must be >= 1')

    if pop.dim < 1:
        raise ConfigError('population.dim', 'must be >= 1')
    if not (0 < pop.cost_min <= pop.cost_max):
        raise ConfigError('population.cost_min', 'need 0 < cost_min <= cost_max')
    if pop.cost_min < auction.b_min:
        raise ConfigError('population.cost_min', 'must be >= auction.b_min so bids respect b_min')
    if pop.cost_max > auction.b_max:
        raise ConfigError('population.cost_max', 'must be <= auction.b_max so bids respect b_max')
    if pop.type == 'synthetic':
        if config.mode == 'offline' and pop.n < auction.k + 1:
            raise ConfigError('population.n', 'must be >= auction.k + 1')
        if config.mode == 'online' and pop.workers_per_slot < auction.k + 1:
            raise ConfigError('population.workers_per_slot', 'must be >= auction.k + 1')
    elif not pop.csv_path:
        raise ConfigError('population.csv_path', 'required for csv populations')
    if pop.pool_size is not None and pop.pool_size < pop.workers_per_slot:
        raise ConfigError('population.pool_size', 'must be >= population.workers_per_slot')

    if not quality.L > 0:
        raise ConfigError('population.quality.L', 'must be > 0')
    if not quality.alpha > 0:
        raise ConfigError('population.quality.alpha', 'must be > 0')
    if not quality.sigma > 0:
        raise ConfigError('population.quality.sigma', 'must be > 0')
    if quality.type == 'trajectory' and pop.dim != 2:
        raise ConfigError('population.dim', 'trajectory quality needs dim = 2')
    if quality.type == 'table' and quality.values is None:
        raise ConfigError('population.quality.values', 'required for table quality')
    if quality.type == 'bump':
        if quality.bumps < 1:
            raise ConfigError('population.quality.bumps', 'must be >= 1')
        if not quality.width > 0:
            raise ConfigError('population.quality.width', 'must be > 0')
        if not (0 <= quality.low < quality.high <= 1):
            raise ConfigError('population.quality.low', 'need 0 <= low < high <= 1')
    if quality.type == 'constant' and not (0 <= quality.value <= 1):
        raise ConfigError('population.quality.value', 'must lie in [0, 1]')

    for i, eps in enumerate(config.epsilons):
        if not (0 < eps < 1):
            raise ConfigError(f'epsilons[{i}]', 'must lie in (0, 1)')
    if config.trials < 1:
        raise ConfigError('trials', 'must be >= 1')
    if config.horizon is not None and config.horizon < 1:
        raise ConfigError('horizon', 'must be >= 1')

    axis, values = config.sweep.axis, config.sweep.values
    if not values and config.budget is None:
        raise ConfigError('sweep.values', 'give sweep values or a single budget')
    if values and axis != 'budget' and config.budget is None:
        raise ConfigError('budget', f'required when sweeping over {axis!r}')
    for i, value in enumerate(values):
        where = f'sweep.values[{i}]'
        if axis == 'budget' and value < 0:
            raise ConfigError(where, 'budget must be >= 0')
        if axis == 'workers' and (value != int(value) or value < auction.k + 1):
            raise ConfigError(where, 'worker counts must be integers >= auction.k + 1')
        if axis == 'dimension' and (value != int(value) or value < 1):
            raise ConfigError(where, 'dimensions must be integers >= 1')
        if axis == 'epsilon' and not (0 < value < 1):
            raise ConfigError(where, 'epsilon must lie in (0, 1)')
    if axis == 'dimension' and quality.type in ('trajectory', 'table'):
        raise ConfigError('sweep.axis', f'{quality.type} quality has a fixed dimension')
    if config.budget is not None and config.budget < 0:
        raise ConfigError('budget', 'must be >= 0')

    grid = config.probe.grid.split(':')
    if len(grid) != 3:
        raise ConfigError('probe.grid', 'expected lo:hi:n')


def config_from_dict(data: Any, source: str | None = None) -> ExperimentConfig:
    """Build and validate an ExperimentConfig from parsed JSON."""
    reader = _Reader(data, '')
    d = ExperimentConfig()

    population = _read_population(reader.child('population'))
    auction = _read_auction(reader.child('auction'))

    sweep_reader = reader.child('sweep')
    sweep = SweepSpec(
        axis=sweep_reader.take('axis', _choice(SWEEP_AXES), 'budget'),
        values=sweep_reader.take('values', _list(_float), []),
    )
    sweep_reader.finish()

    probe_reader = reader.child('probe')
    probe = ProbeSpec(
        worker=probe_reader.take('worker', _optional(_int), None),
        grid=probe_reader.take('grid', _str, ProbeSpec.grid),
        budget=probe_reader.take('budget', _optional(_float), None),
    )
    probe_reader.finish()

    config = ExperimentConfig(
        mode=reader.take('mode', _choice(MODES), d.mode),
        mechanisms=reader.take('mechanisms', _list(_str), d.mechanisms),
        population=population,
        auction=auction,
        sweep=sweep,
        epsilons=reader.take('epsilons', _list(_float), d.epsilons),
        trials=reader.take('trials', _int, d.trials),
        seed=reader.take('seed', _int, d.seed),
        budget=reader.take('budget', _optional(_float), d.budget),
        resample_population=reader.take('resample_population', _bool, d.resample_population),
        horizon=reader.take('horizon', _optional(_int), d.horizon),
        probe=probe,
        source=source,
    )
    reader.finish()

    # Relative CSV paths resolve against the config file's directory
    if config.population.csv_path and source and not Path(config.population.csv_path).is_absolute():
        base = Path(source).parent
        config.population.csv_path = str(base / config.population.csv_path)

    _validate(config)
    return config


def list_presets() -> list[str]:
    """Names of the configs shipped with the package; aliases are not listed."""
    folder = resources.files('caci_bench') / 'presets'
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith('.json'))


def load_config(name_or_path: str, seed: int | None = None) -> ExperimentConfig:
    """
    Load a config file, or a preset when no such file exists.

    An explicit seed (from --seed or CACI_BENCH_SEED) replaces the file's seed.
    """
    path = Path(name_or_path)
    if path.is_file():
        text, source = path.read_text(encoding='utf-8'), str(path)
    else:
        name = PRESET_ALIASES.get(name_or_path, name_or_path)
        preset = resources.files('caci_bench') / 'presets' / f'{name}.json'
        if not preset.is_file():
            raise ConfigError('', f'no config file or preset named {name_or_path!r}')
        text, source = preset.read_text(encoding='utf-8'), None

    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError('', f'invalid JSON at line {e.lineno}: {e.msg}') from e

    if seed is not None and isinstance(data, dict):
        data['seed'] = seed
    return config_from_dict(data, source=source)
