"""Economic and statistical property checks."""

from .truthfulness import TruthProbeResult, parse_grid, probe_truthfulness, true_cost_of, worker_outcome
from .rationality import RationalityReport, RationalityViolation, audit_individual_rationality
from .bounds import (
    RegretBound,
    RegretBoundParams,
    compute_bound_constants,
    cube_qualities,
    min_sum_gap,
    offline_regret_bound,
    online_regret_bound,
)
from .concentration import ConcentrationReport, check_ucb_concentration
from .fitting import ExponentFit, fit_regret_exponent

__all__ = [
    'TruthProbeResult',
    'parse_grid',
    'probe_truthfulness',
    'true_cost_of',
    'worker_outcome',
    'RationalityReport',
    'RationalityViolation',
    'audit_individual_rationality',
    'RegretBound',
    'RegretBoundParams',
    'compute_bound_constants',
    'cube_qualities',
    'min_sum_gap',
    'offline_regret_bound',
    'online_regret_bound',
    'ConcentrationReport',
    'check_ucb_concentration',
    'ExponentFit',
    'fit_regret_exponent',
]
