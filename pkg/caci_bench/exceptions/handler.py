"""Turns trial failures into captures and forwards them to an output sink."""

from __future__ import annotations

import threading
from typing import TYPE_CHECKING, Any, Callable

from .capture import FailureCapture, FailureCaptureBuilder

if TYPE_CHECKING:
    from ..config import BenchSettings


FailureSink = Callable[[FailureCapture], None]


class FailureHandler:
    """Handles failure capture and reporting for the trial pool."""

    def __init__(self, settings: 'BenchSettings', sink: FailureSink | None = None) -> None:
        self.settings = settings
        self._sink = sink
        self._capture_builder = FailureCaptureBuilder()
        self._lock = threading.Lock()
        self._captures: list[FailureCapture] = []

    @property
    def failures(self) -> list[FailureCapture]:
        with self._lock:
            return list(self._captures)

    @property
    def failure_count(self) -> int:
        with self._lock:
            return len(self._captures)

    def capture(
        self,
        exception: BaseException,
        context: dict[str, Any] | None = None,
    ) -> FailureCapture:
        """Record a failure raised by a trial."""
        capture = self._capture_builder.capture(exception, context)

        with self._lock:
            self._captures.append(capture)

        if self.settings.debug:
            print(
                f'[CACI Bench] Trial failed ({capture.exception_type}, '
                f'fingerprint {capture.fingerprint}): {capture.message}'
            )

        if self._sink is not None:
            try:
                self._sink(capture)
            except Exception as e:
                if self.settings.debug:
                    print(f'[CACI Bench] Error writing failure capture: {e}')

        return capture
