"""Collects slot outcomes and diagnostics while a mechanism runs."""

from __future__ import annotations

from typing import Any

import numpy as np

from .trace import PHASES, ExperimentTrace, SlotBlock


def _rows(values: np.ndarray, count: int, width: int, dtype: Any) -> np.ndarray:
    array = np.asarray(values, dtype=dtype)
    if array.ndim == 1:
        return np.broadcast_to(array, (count, width))
    return array.reshape(count, width)


class TraceRecorder:
    """
    Builds an ExperimentTrace slot by slot.

    Mechanisms report what they selected, paid and observed; expected rewards are filled
    in from the true qualities here, so a learning mechanism never reads them itself.
    """

    def __init__(self, mechanism: str, budget: float, population_fingerprint: str) -> None:
        self.mechanism = mechanism
        self.budget = float(budget)
        self.population_fingerprint = population_fingerprint
        self.params: dict[str, Any] = {}
        self._blocks: list[SlotBlock] = []
        self._diagnostics: list[str] = []
        self._seen: set[str] = set()

    def set_params(self, **params: Any) -> None:
        self.params.update(params)

    def diagnostic(self, message: str) -> None:
        """Record a diagnostic once; repeats of the same text are dropped."""
        if message not in self._seen:
            self._seen.add(message)
            self._diagnostics.append(message)

    def record_slots(
        self,
        phase: str,
        first_slot: int,
        selected: np.ndarray,
        payments: np.ndarray,
        rewards: np.ndarray,
        qualities: np.ndarray,
        residuals: np.ndarray,
    ) -> None:
        """
        Record consecutive slots.

        selected, payments and qualities are either (count, width) or a single (width,)
        row shared by every slot; rewards is (count, width).
        """
        if phase not in PHASES:
            raise ValueError(f'unknown phase {phase!r}')
        residuals = np.asarray(residuals, dtype=np.float64)
        count = int(residuals.shape[0])
        if count == 0:
            return
        width = int(np.asarray(rewards).size // count)
        selected_rows = _rows(selected, count, width, np.int64)
        quality_rows = _rows(qualities, count, width, np.float64)
        self._blocks.append(SlotBlock(
            phase=phase,
            slots=np.arange(first_slot, first_slot + count, dtype=np.int64),
            selected=selected_rows,
            payments=_rows(payments, count, width, np.float64),
            rewards=np.asarray(rewards, dtype=np.int8).reshape(count, width),
            expected=quality_rows.sum(axis=1),
            residuals=residuals,
        ))

    def record_slot(
        self,
        phase: str,
        slot: int,
        selected: np.ndarray,
        payments: np.ndarray,
        rewards: np.ndarray,
        qualities: np.ndarray,
        residual: float,
    ) -> None:
        width = int(np.asarray(selected).size)
        self.record_slots(
            phase,
            slot,
            np.asarray(selected).reshape(1, width),
            np.asarray(payments).reshape(1, width),
            np.asarray(rewards).reshape(1, width),
            np.asarray(qualities).reshape(1, width),
            np.asarray([residual]),
        )

    def skip_slot(self, slot: int, residual: float, reason: str | None = None) -> None:
        """Record a slot in which nobody was selected."""
        if reason:
            self.diagnostic(reason)
        last = self._blocks[-1] if self._blocks else None
        if last is not None and last.phase == 'skipped' and int(last.slots[-1]) + 1 == slot:
            # Extend the running block of idle slots
            count = len(last) + 1
            self._blocks[-1] = SlotBlock(
                phase='skipped',
                slots=np.arange(int(last.slots[0]), slot + 1, dtype=np.int64),
                selected=np.empty((count, 0), dtype=np.int64),
                payments=np.empty((count, 0)),
                rewards=np.empty((count, 0), dtype=np.int8),
                expected=np.zeros(count),
                residuals=np.append(last.residuals, float(residual)),
            )
            return
        empty = np.empty((1, 0))
        self.record_slots('skipped', slot, empty, empty, empty, empty, np.asarray([residual]))

    def finish(self, residual: float) -> ExperimentTrace:
        return ExperimentTrace(
            mechanism=self.mechanism,
            budget=self.budget,
            population_fingerprint=self.population_fingerprint,
            blocks=list(self._blocks),
            params=dict(self.params),
            diagnostics=list(self._diagnostics),
            residual=float(residual),
        )
