"""Building blocks shared by the mechanism state machines."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np

from ..auction import SelectionOutcome
from ..exceptions import InvalidParameterError
from .state import BudgetLedger, affordable_slots

if TYPE_CHECKING:
    from ..population import ArrivalProcess, OfflinePool, RewardSource
    from ..tracer import TraceRecorder

# Unbounded streams give up after this many consecutive slots without a selection
MAX_IDLE_SLOTS = 10_000


class CubeIndex:
    """Rows of a worker array grouped by the arm (hypercube) they fall in."""

    def __init__(self, cubes: np.ndarray, cells: int) -> None:
        cubes = np.asarray(cubes, dtype=np.int64)
        self.cubes = cubes
        self.cells = int(cells)
        self._order = np.argsort(cubes, kind='stable')
        sorted_cubes = cubes[self._order]
        self._occupied, self._starts, self._sizes = np.unique(
            sorted_cubes, return_index=True, return_counts=True
        )
        self._slot_of = {int(c): i for i, c in enumerate(self._occupied)}
        # _order is stable, so each group starts at its lowest row
        self._walk = self._occupied[np.argsort(self._order[self._starts], kind='stable')]

    @property
    def occupied(self) -> np.ndarray:
        """Cubes holding at least one worker, ascending."""
        return self._occupied

    @property
    def walk(self) -> np.ndarray:
        """Occupied cubes ordered by their lowest worker row; the exploration cycle."""
        return self._walk

    def members(self, cube: int) -> np.ndarray:
        i = self._slot_of.get(int(cube))
        if i is None:
            return self._order[:0]
        start = self._starts[i]
        return self._order[start:start + self._sizes[i]]


def pick_round_robin(
    index: CubeIndex,
    k: int,
    cursor: int,
    rng: np.random.Generator,
    recorder: 'TraceRecorder',
) -> tuple[np.ndarray, int]:
    """
    One exploration slot: walk the occupied cubes cyclically from cursor, in the order
    of their lowest worker row, and take one uniform random unpicked worker from each
    until K workers are chosen.

    With one worker per cube this visits workers in row order, the same order the
    per-worker bandit uses. Cubes whose workers were all picked earlier in the same slot
    are skipped. Returns the chosen rows and the advanced cursor.
    """
    walk = index.walk
    if walk.size < index.cells:
        recorder.diagnostic('exploration skipped hypercubes that contain no workers')
    chosen: list[int] = []
    taken: dict[int, list[int]] = {}
    misses = 0
    while len(chosen) < k and walk.size:
        if misses >= walk.size:
            break
        cube = int(walk[cursor % walk.size])
        cursor += 1
        members = index.members(cube)
        used = taken.get(cube)
        if used:
            members = members[~np.isin(members, used)]
            if members.size == 0:
                recorder.diagnostic('exploration skipped hypercubes whose workers were already picked in the slot')
                misses += 1
                continue
        row = int(members[rng.integers(members.size)])
        chosen.append(row)
        taken.setdefault(cube, []).append(row)
        misses = 0
    if len(chosen) < k:
        raise InvalidParameterError(f'only {len(chosen)} distinct workers available for K={k}')
    return np.asarray(chosen, dtype=np.int64), cursor


def explore_slots(
    pool: 'OfflinePool',
    index: CubeIndex,
    slots: int,
    k: int,
    b_max: float,
    ledger: BudgetLedger,
    recorder: 'TraceRecorder',
    source: 'RewardSource',
    rng: np.random.Generator,
    first_slot: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Run slots off-line exploration rounds at b_max per pick.

    Returns the picked rows and the observed rewards, both shaped (slots, K).
    """
    if slots <= 0:
        return np.empty((0, k), dtype=np.int64), np.empty((0, k), dtype=np.int8)
    rows = np.empty((slots, k), dtype=np.int64)
    cursor = 0
    for s in range(slots):
        rows[s], cursor = pick_round_robin(index, k, cursor, rng, recorder)
    flat = rows.ravel()
    rewards = source.draw(pool.ids[flat], pool.qualities[flat], rng).reshape(slots, k)
    residuals = ledger.charge_slots(k * b_max, slots)
    recorder.record_slots(
        'exploration',
        first_slot,
        pool.ids[rows],
        np.full(k, b_max),
        rewards,
        pool.qualities[rows],
        residuals,
    )
    return rows, rewards


def exploit_fixed(
    pool: 'OfflinePool',
    outcome: SelectionOutcome,
    ledger: BudgetLedger,
    recorder: 'TraceRecorder',
    source: 'RewardSource',
    rng: np.random.Generator,
    first_slot: int,
) -> int:
    """Repeat one selected set while the residual covers its payments; returns the next slot."""
    per_slot = outcome.total_payment
    count = affordable_slots(ledger.residual, per_slot)
    if count == 0:
        return first_slot
    rows = outcome.rows
    width = rows.shape[0]
    rewards = source.draw(
        np.tile(pool.ids[rows], count),
        np.tile(pool.qualities[rows], count),
        rng,
    ).reshape(count, width)
    residuals = ledger.charge_slots(per_slot, count)
    recorder.record_slots(
        'exploitation',
        first_slot,
        pool.ids[rows],
        outcome.payments,
        rewards,
        pool.qualities[rows],
        residuals,
    )
    return first_slot + count


def stream_open(
    arrivals: 'ArrivalProcess',
    t: int,
    ledger: BudgetLedger,
    floor: float,
    idle: int,
    recorder: 'TraceRecorder',
) -> bool:
    """Whether an on-line run should look at slot t at all."""
    if arrivals.horizon is not None and t > arrivals.horizon:
        return False
    if ledger.residual < floor:
        recorder.diagnostic('stopped: residual budget can no longer pay a full selection')
        return False
    if arrivals.horizon is None and idle >= MAX_IDLE_SLOTS:
        recorder.diagnostic(f'stopped after {MAX_IDLE_SLOTS} consecutive slots without a selection')
        return False
    return True


def forward_diagnostics(source: 'RewardSource', recorder: 'TraceRecorder') -> None:
    for message in source.diagnostics:
        recorder.diagnostic(message)
