"""Log-log growth fits of regret against budget."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.stats import linregress

from ..exceptions import FitError, InvalidParameterError

MIN_POINTS = 4
MIN_USABLE_POINTS = 3


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float
    points_used: int
    dropped: int


def fit_regret_exponent(budgets: Sequence[float], regrets: Sequence[float]) -> ExponentFit:
    """
    Least-squares slope of log(regret) on log(budget).

    Points with non-positive (or non-finite) regret are dropped before fitting.
    """
    x = np.asarray(budgets, dtype=float)
    y = np.asarray(regrets, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InvalidParameterError('budgets and regrets must be 1-D sequences of equal length')
    if x.size < MIN_POINTS:
        raise InvalidParameterError(f'need at least {MIN_POINTS} budget points, got {x.size}')
    if np.any(x <= 0):
        raise InvalidParameterError('budgets must be positive')

    keep = np.isfinite(y) & (y > 0)
    used = int(keep.sum())
    if used < MIN_USABLE_POINTS:
        raise FitError(f'only {used} positive regret points remain; need {MIN_USABLE_POINTS}')
    log_x, log_y = np.log(x[keep]), np.log(y[keep])
    if np.ptp(log_x) == 0:
        raise FitError('all remaining points share one budget')

    fit = linregress(log_x, log_y)
    return ExponentFit(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=float(fit.rvalue ** 2),
        points_used=used,
        dropped=int(x.size - used),
    )


__all__ = ['ExponentFit', 'fit_regret_exponent']
