"""Quality functions mapping contexts to expected rewards, each with a Hoelder certificate."""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..context_space import ContextVector, HoelderParams
from ..exceptions import InvalidParameterError

__all__ = [
    'QualityFunction',
    'BumpField',
    'TrajectoryQuality',
    'ConstantQuality',
    'TableQuality',
    'trajectory_quality',
]


class QualityFunction(ABC):
    """Deterministic map [0,1]^M -> [0,1] with a certified (L, alpha) pair."""

    name: str = 'quality'

    @property
    @abstractmethod
    def certified(self) -> HoelderParams:
        """Hoelder parameters the function provably satisfies."""

    @property
    @abstractmethod
    def value_range(self) -> tuple[float, float]:
        """Bounds (mu_min, mu_max) on the image."""

    @abstractmethod
    def evaluate(self, contexts: np.ndarray) -> np.ndarray:
        """Evaluate on an (N, M) array of contexts."""

    def __call__(self, context: ContextVector) -> float:
        return float(self.evaluate(np.asarray([context.coords], dtype=float))[0])

    def describe(self) -> dict[str, object]:
        low, high = self.value_range
        return {
            'type': self.name,
            'L': self.certified.L,
            'alpha': self.certified.alpha,
            'mu_min': low,
            'mu_max': high,
        }


class BumpField(QualityFunction):
    """
    Saturated sum of Gaussian bumps rescaled into [low, high].

    mu(s) = low + (high - low) * min(1, sum_j w_j exp(-|s - c_j|^2 / (2 h^2)))

    Each bump has gradient norm at most w_j e^{-1/2} / h and min(1, .) is 1-Lipschitz,
    so the field is Lipschitz (alpha = 1) with L = (high - low) * sum(w) * e^{-1/2} / h.
    """

    name = 'bump'

    def __init__(
        self,
        centers: np.ndarray,
        weights: np.ndarray,
        width: float,
        low: float = 0.05,
        high: float = 0.95,
    ) -> None:
        centers = np.asarray(centers, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if centers.ndim != 2 or centers.shape[0] < 1:
            raise InvalidParameterError('bump centers must be a non-empty (n, M) array')
        if weights.shape != (centers.shape[0],) or np.any(weights <= 0):
            raise InvalidParameterError('bump weights must be positive, one per center')
        if width <= 0:
            raise InvalidParameterError(f'bump width must be > 0, got {width!r}')
        if not (0.0 <= low < high <= 1.0):
            raise InvalidParameterError(f'need 0 <= low < high <= 1, got {low!r}, {high!r}')

        self.centers = centers
        self.weights = weights
        self.width = float(width)
        self.low = float(low)
        self.high = float(high)
        self._certified = HoelderParams(
            L=(self.high - self.low) * float(weights.sum()) * math.exp(-0.5) / self.width,
            alpha=1.0,
        )

    @classmethod
    def random(
        cls,
        dim: int,
        rng: np.random.Generator,
        bumps: int = 8,
        width: float = 0.15,
        low: float = 0.05,
        high: float = 0.95,
    ) -> BumpField:
        if bumps < 1:
            raise InvalidParameterError(f'need at least one bump, got {bumps}')
        centers = rng.random((bumps, dim))
        weights = rng.uniform(0.5, 1.0, size=bumps)
        return cls(centers, weights, width, low, high)

    @property
    def certified(self) -> HoelderParams:
        return self._certified

    @property
    def value_range(self) -> tuple[float, float]:
        return self.low, self.high

    def evaluate(self, contexts: np.ndarray) -> np.ndarray:
        contexts = np.asarray(contexts, dtype=float)
        if contexts.ndim != 2 or contexts.shape[1] != self.centers.shape[1]:
            raise InvalidParameterError(
                f'contexts must have shape (N, {self.centers.shape[1]}), got {contexts.shape}'
            )
        sq = ((contexts[:, None, :] - self.centers[None, :, :]) ** 2).sum(axis=2)
        field = (self.weights * np.exp(-sq / (2.0 * self.width ** 2))).sum(axis=1)
        return self.low + (self.high - self.low) * np.minimum(1.0, field)


def trajectory_quality(context: ContextVector, sigma: float) -> float:
    """
    Normalized trajectory sensing ability for context (distance s0, battery s1).

    (1/sigma) sqrt(s1 / 2 pi) exp(-s0^2 / 2 sigma^2) divided by its maximum over [0,1]^2,
    which is attained at s0 = 0, s1 = 1.
    """
    if not sigma > 0:
        raise InvalidParameterError(f'sigma must be > 0, got {sigma!r}')
    if context.dim != 2:
        raise InvalidParameterError(f'trajectory quality needs M = 2, got {context.dim}')
    s0, s1 = context.coords
    return math.sqrt(s1) * math.exp(-s0 * s0 / (2.0 * sigma * sigma))


class TrajectoryQuality(QualityFunction):
    """
    Vectorized trajectory quality.

    sqrt is 1/2-Hoelder with constant 1 and the Gaussian factor is Lipschitz with
    constant e^{-1/2}/sigma; on the unit square this gives alpha = 1/2 and
    L = 1 + e^{-1/2}/sigma.
    """

    name = 'trajectory'

    def __init__(self, sigma: float = 1.0) -> None:
        if not sigma > 0:
            raise InvalidParameterError(f'sigma must be > 0, got {sigma!r}')
        self.sigma = float(sigma)
        self._certified = HoelderParams(L=1.0 + math.exp(-0.5) / self.sigma, alpha=0.5)

    @property
    def certified(self) -> HoelderParams:
        return self._certified

    @property
    def value_range(self) -> tuple[float, float]:
        return 0.0, 1.0

    def evaluate(self, contexts: np.ndarray) -> np.ndarray:
        contexts = np.asarray(contexts, dtype=float)
        if contexts.ndim != 2 or contexts.shape[1] != 2:
            raise InvalidParameterError(f'trajectory quality needs (N, 2) contexts, got {contexts.shape}')
        s0 = contexts[:, 0]
        s1 = contexts[:, 1]
        return np.sqrt(s1) * np.exp(-s0 * s0 / (2.0 * self.sigma ** 2))


class ConstantQuality(QualityFunction):
    """Every context has the same quality."""

    name = 'constant'

    def __init__(self, value: float = 0.5) -> None:
        if not (0.0 <= value <= 1.0):
            raise InvalidParameterError(f'constant quality must lie in [0, 1], got {value!r}')
        self.value = float(value)

    @property
    def certified(self) -> HoelderParams:
        return HoelderParams(L=1e-12, alpha=1.0)

    @property
    def value_range(self) -> tuple[float, float]:
        return self.value, self.value

    def evaluate(self, contexts: np.ndarray) -> np.ndarray:
        contexts = np.asarray(contexts, dtype=float)
        return np.full(contexts.shape[0], self.value)


class TableQuality(QualityFunction):
    """
    Multilinear interpolation of a value table on a regular grid over [0,1]^M.

    Within one interpolation cell the partial derivative along j is bounded by the
    largest adjacent difference along j times (n_j - 1), which gives the certificate.
    """

    name = 'table'

    def __init__(self, values: np.ndarray | Sequence) -> None:
        table = np.asarray(values, dtype=float)
        if table.ndim < 1 or any(n < 2 for n in table.shape):
            raise InvalidParameterError('quality table needs at least two nodes per dimension')
        if np.any(table < 0.0) or np.any(table > 1.0):
            raise InvalidParameterError('quality table values must lie in [0, 1]')

        self.table = table
        axes = tuple(np.linspace(0.0, 1.0, n) for n in table.shape)
        self._interp = RegularGridInterpolator(axes, table, method='linear')

        slopes = []
        for j, n in enumerate(table.shape):
            slopes.append(float(np.abs(np.diff(table, axis=j)).max()) * (n - 1))
        L = math.sqrt(sum(s * s for s in slopes))
        self._certified = HoelderParams(L=L if L > 0 else 1e-12, alpha=1.0)

    @property
    def certified(self) -> HoelderParams:
        return self._certified

    @property
    def value_range(self) -> tuple[float, float]:
        return float(self.table.min()), float(self.table.max())

    def evaluate(self, contexts: np.ndarray) -> np.ndarray:
        contexts = np.asarray(contexts, dtype=float)
        if contexts.ndim != 2 or contexts.shape[1] != self.table.ndim:
            raise InvalidParameterError(
                f'contexts must have shape (N, {self.table.ndim}), got {contexts.shape}'
            )
        return np.clip(self._interp(contexts), 0.0, 1.0)
