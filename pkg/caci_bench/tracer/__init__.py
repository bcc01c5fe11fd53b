"""Trace recording for mechanism runs."""

from .trace import PHASES, ExperimentTrace, SlotBlock, SlotRecord
from .recorder import TraceRecorder

__all__ = ['PHASES', 'ExperimentTrace', 'SlotBlock', 'SlotRecord', 'TraceRecorder']
