"""Worker populations: quality fields, pools, arrival streams, rewards and CSV ingestion."""

from .quality import (
    BumpField,
    ConstantQuality,
    QualityFunction,
    TableQuality,
    TrajectoryQuality,
    trajectory_quality,
)
from .rewards import BernoulliRewards, ReplayRewards, RewardSource
from .workers import OfflinePool, Worker, generate_offline_pool, sample_reward, sample_rewards
from .arrivals import ArrivalProcess, RecordedArrivals, SyntheticArrivals
from .ingest import CsvSchema, ingest_worker_csv
from .factory import Population, build_population, build_quality

__all__ = [
    'QualityFunction',
    'BumpField',
    'TrajectoryQuality',
    'ConstantQuality',
    'TableQuality',
    'trajectory_quality',
    'RewardSource',
    'BernoulliRewards',
    'ReplayRewards',
    'Worker',
    'OfflinePool',
    'generate_offline_pool',
    'sample_reward',
    'sample_rewards',
    'ArrivalProcess',
    'SyntheticArrivals',
    'RecordedArrivals',
    'CsvSchema',
    'ingest_worker_csv',
    'Population',
    'build_population',
    'build_quality',
]
