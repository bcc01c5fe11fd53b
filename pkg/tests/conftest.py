"""Shared fixtures: tiny hand-checkable pools, small synthetic pools and configs."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from caci_bench.config import config_from_dict
from caci_bench.context_space import HoelderParams
from caci_bench.mechanisms import MechanismConfig
from caci_bench.population import BumpField, ConstantQuality, OfflinePool, SyntheticArrivals, generate_offline_pool


def make_pool(qualities, bids, costs=None, contexts=None, first_id=0) -> OfflinePool:
    qualities = np.asarray(qualities, dtype=float)
    n = qualities.shape[0]
    if contexts is None:
        contexts = (np.arange(n, dtype=float) + 0.5).reshape(-1, 1) / n
    return OfflinePool(
        ids=np.arange(first_id, first_id + n),
        contexts=contexts,
        costs=np.asarray(costs if costs is not None else bids, dtype=float),
        bids=np.asarray(bids, dtype=float),
        qualities=qualities,
    )


def small_config_dict(**overrides: Any) -> dict[str, Any]:
    """An off-line config that runs in well under a second."""
    data: dict[str, Any] = {
        'mode': 'offline',
        'mechanisms': ['baseline', 'caci', 'eps_first'],
        'population': {'type': 'synthetic', 'n': 60, 'dim': 2, 'quality': {'type': 'bump'}},
        'auction': {'k': 3, 'b_min': 0.2, 'b_max': 1.0},
        'sweep': {'axis': 'budget', 'values': [200, 400]},
        'epsilons': [0.3],
        'trials': 2,
        'seed': 11,
    }
    data.update(overrides)
    return data


@pytest.fixture
def hand_pool() -> OfflinePool:
    """Three workers, mu = (0.9, 0.8, 0.5), all bids 0.5."""
    return make_pool([0.9, 0.8, 0.5], [0.5, 0.5, 0.5])


@pytest.fixture
def hand_config() -> MechanismConfig:
    return MechanismConfig(k=1, b_min=0.2, b_max=1.0)


@pytest.fixture
def small_pool() -> OfflinePool:
    rng = np.random.default_rng(5)
    field = BumpField.random(2, rng)
    return generate_offline_pool(80, 2, (0.2, 1.0), field, seed=5, strategic=True, b_max=1.0)


@pytest.fixture
def small_config() -> MechanismConfig:
    return MechanismConfig(k=4, b_min=0.2, b_max=1.0, hoelder=HoelderParams(L=1.0, alpha=1.0))


@pytest.fixture
def small_stream() -> SyntheticArrivals:
    rng = np.random.default_rng(9)
    return SyntheticArrivals(30, 2, (0.2, 1.0), BumpField.random(2, rng), seed=9, horizon=200)


@pytest.fixture
def constant_stream() -> SyntheticArrivals:
    """Identical workers: quality 0.5, every cost and bid 0.5."""
    return SyntheticArrivals(6, 2, (0.5, 0.5), ConstantQuality(0.5), seed=1)


@pytest.fixture
def experiment():
    return config_from_dict(small_config_dict())


@pytest.fixture
def config_file(tmp_path: Path):
    """Write a config dict to a JSON file and return its path."""

    def write(data: dict[str, Any], name: str = 'config.json') -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return path

    return write
