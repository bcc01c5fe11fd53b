"""
Context space [0,1]^M and its uniform partition into d^M hypercubes.

Cells are indexed row-major with dimension 0 as the most significant digit, and a
coordinate of exactly 1.0 belongs to the last cell along its dimension so that the
tiling covers the closed cube.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import InvalidParameterError

__all__ = [
    'ContextVector',
    'HoelderParams',
    'PartitionGrid',
    'HypercubeId',
    'compute_granularity',
    'locate',
    'locate_many',
    'delta_bound',
]

MAX_CELL_COUNT = 2 ** 64 - 1
_INT64_MAX = 2 ** 63 - 1
_SNAP_TOLERANCE = 1e-9

HypercubeId = int


@dataclass(frozen=True)
class ContextVector:
    """A point of the context space, every coordinate in [0, 1]."""

    coords: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.coords) < 1:
            raise InvalidParameterError('context must have at least one dimension')
        for i, c in enumerate(self.coords):
            if not (0.0 <= c <= 1.0):
                raise InvalidParameterError(f'context coordinate {i} = {c!r} outside [0, 1]')

    @classmethod
    def of(cls, *coords: float) -> ContextVector:
        return cls(tuple(float(c) for c in coords))

    @property
    def dim(self) -> int:
        return len(self.coords)


@dataclass(frozen=True)
class HoelderParams:
    """Smoothness certificate |mu(s) - mu(s')| <= L * ||s - s'||^alpha."""

    L: float
    alpha: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.L) and self.L > 0):
            raise InvalidParameterError(f'Hoelder constant L must be > 0, got {self.L!r}')
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidParameterError(f'Hoelder exponent alpha must be > 0, got {self.alpha!r}')


@dataclass(frozen=True)
class PartitionGrid:
    """Uniform partition of [0,1]^dim with granularity d per dimension."""

    dim: int
    granularity: int

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise InvalidParameterError(f'dimension M must be >= 1, got {self.dim}')
        if self.granularity < 1:
            raise InvalidParameterError(f'granularity d must be >= 1, got {self.granularity}')
        if self.granularity ** self.dim > MAX_CELL_COUNT:
            raise InvalidParameterError(
                f'd^M = {self.granularity}^{self.dim} does not fit in a 64-bit unsigned integer'
            )

    @property
    def cell_count(self) -> int:
        return self.granularity ** self.dim

    @property
    def cell_diameter(self) -> float:
        """Largest distance between two points of one cell."""
        return math.sqrt(self.dim) / self.granularity

    def cell_indices(self, cube: HypercubeId) -> tuple[int, ...]:
        """Inverse of the row-major linearization."""
        if not (0 <= cube < self.cell_count):
            raise InvalidParameterError(f'hypercube id {cube} outside [0, {self.cell_count})')
        digits = []
        for _ in range(self.dim):
            cube, digit = divmod(cube, self.granularity)
            digits.append(digit)
        return tuple(reversed(digits))

    def linear_index(self, cells: Sequence[int]) -> HypercubeId:
        """Row-major linearization, dimension 0 most significant."""
        if len(cells) != self.dim:
            raise InvalidParameterError(f'expected {self.dim} cell indices, got {len(cells)}')
        index = 0
        for c in cells:
            if not (0 <= c < self.granularity):
                raise InvalidParameterError(f'cell index {c} outside [0, {self.granularity})')
            index = index * self.granularity + int(c)
        return index


def compute_granularity(budget: float, hoelder: HoelderParams, dim: int) -> int:
    """Return d = ceil(B^(1 / (3 alpha + M)))."""
    if not math.isfinite(budget):
        raise InvalidParameterError(f'budget must be finite, got {budget!r}')
    if budget < 1:
        raise InvalidParameterError(f'budget must be >= 1 for the granularity rule, got {budget!r}')
    if dim < 1:
        raise InvalidParameterError(f'dimension M must be >= 1, got {dim}')

    value = budget ** (1.0 / (3.0 * hoelder.alpha + dim))
    # Float error near an integer would shift the ceiling by one
    nearest = round(value)
    if abs(value - nearest) <= _SNAP_TOLERANCE * max(1.0, nearest):
        value = float(nearest)
    return max(1, math.ceil(value))


def locate(context: ContextVector, grid: PartitionGrid) -> HypercubeId:
    """Return the hypercube containing the context."""
    if context.dim != grid.dim:
        raise InvalidParameterError(
            f'context has dimension {context.dim}, grid has dimension {grid.dim}'
        )
    d = grid.granularity
    cells = [min(int(math.floor(c * d)), d - 1) for c in context.coords]
    return grid.linear_index(cells)


def locate_many(contexts: np.ndarray, grid: PartitionGrid) -> np.ndarray:
    """Vectorized locate over an (N, M) array; returns int64 hypercube ids."""
    contexts = np.asarray(contexts, dtype=float)
    if contexts.ndim != 2 or contexts.shape[1] != grid.dim:
        raise InvalidParameterError(
            f'contexts must have shape (N, {grid.dim}), got {contexts.shape}'
        )
    if grid.cell_count > _INT64_MAX:
        raise InvalidParameterError(f'{grid.cell_count} cells cannot be indexed as int64')

    d = grid.granularity
    cells = np.minimum(np.floor(contexts * d).astype(np.int64), d - 1)
    index = np.zeros(contexts.shape[0], dtype=np.int64)
    for j in range(grid.dim):
        index = index * d + cells[:, j]
    return index


def delta_bound(hoelder: HoelderParams, grid: PartitionGrid) -> float:
    """Intra-cell quality spread L * (sqrt(M) / d)^alpha."""
    return hoelder.L * grid.cell_diameter ** hoelder.alpha
