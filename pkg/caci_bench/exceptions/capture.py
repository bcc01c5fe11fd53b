"""Failure capture data structures for trials that raise during a sweep."""

from __future__ import annotations

import hashlib
import os
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any


@dataclass
class StackFrameInfo:
    """Information about a single stack frame."""

    method_name: str
    file_name: str | None = None
    line_number: int | None = None
    is_native: bool = False

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            'method_name': self.method_name,
            'file_name': self.file_name,
            'line_number': self.line_number,
            'is_native': self.is_native,
        }


@dataclass
class FailureCapture:
    """Complete record of one failed trial."""

    id: str
    exception_type: str
    message: str
    fingerprint: str
    stack_trace: list[StackFrameInfo]
    context: dict[str, Any] = field(default_factory=dict)
    captured_at: str = ''

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            'id': self.id,
            'exception_type': self.exception_type,
            'message': self.message,
            'fingerprint': self.fingerprint,
            'stack_trace': [f.to_dict() for f in self.stack_trace],
            'context': self.context,
            'captured_at': self.captured_at,
        }


class FailureCaptureBuilder:
    """Builds a FailureCapture from a Python exception."""

    max_frames = 50

    def capture(
        self,
        exception: BaseException,
        context: dict[str, Any] | None = None,
    ) -> FailureCapture:
        """Capture the exception together with the trial context."""
        stack_trace = self._extract_stack_trace(exception)

        return FailureCapture(
            id=str(uuid.uuid4()),
            exception_type=type(exception).__name__,
            message=str(exception),
            fingerprint=self._calculate_fingerprint(exception, stack_trace),
            stack_trace=stack_trace,
            context=dict(context or {}),
            captured_at=datetime.now(timezone.utc).isoformat().replace('+00:00', 'Z'),
        )

    def _extract_stack_trace(self, exception: BaseException) -> list[StackFrameInfo]:
        """Extract stack trace from exception."""
        frames: list[StackFrameInfo] = []
        tb = exception.__traceback__

        while tb is not None and len(frames) < self.max_frames:
            code = tb.tb_frame.f_code
            file_path = code.co_filename
            frames.append(StackFrameInfo(
                method_name=code.co_name,
                file_name=os.path.basename(file_path) if file_path else None,
                line_number=tb.tb_lineno,
                is_native=file_path.startswith('<') if file_path else True,
            ))
            tb = tb.tb_next

        return frames

    def _calculate_fingerprint(
        self,
        exception: BaseException,
        stack_trace: list[StackFrameInfo],
    ) -> str:
        """Calculate a stable fingerprint so repeated failures group together."""
        parts = [type(exception).__name__]

        # Innermost frames identify the failure site best
        added = 0
        for frame in reversed(stack_trace):
            if added >= 5:
                break
            if frame.is_native:
                continue
            parts.append(f'{frame.method_name}:{frame.line_number or 0}')
            added += 1

        return hashlib.sha256(':'.join(parts).encode()).hexdigest()[:16]
