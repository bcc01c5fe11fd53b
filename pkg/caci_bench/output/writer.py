"""Serialized file output for sweep results, traces and failures."""

from __future__ import annotations

import json
import queue
import re
import threading
from pathlib import Path
from typing import TYPE_CHECKING, Any

import pandas as pd

from ..simulation import TrialResult, aggregate, results_frame

if TYPE_CHECKING:
    from ..config import BenchSettings, ExperimentConfig
    from ..exceptions import FailureCapture

RESULTS_FILE = 'results.csv'
SUMMARY_FILE = 'summary.txt'
FAILURES_FILE = 'failures.jsonl'
PROBE_FILE = 'truthprobe.csv'

_UNSAFE = re.compile(r'[^A-Za-z0-9_.-]+')


def trace_file_name(mechanism: str, axis_value: float, trial: int) -> str:
    """trace_<mech>_<point>_<trial>.csv with the label reduced to file-safe characters."""
    label = _UNSAFE.sub('-', mechanism).strip('-')
    return f'trace_{label}_{axis_value:g}_{trial}.csv'


class ResultWriter:
    """
    Writes output files from one background thread.

    Trial threads only enqueue typed messages (result, trace, failure); the writer thread
    is the single owner of every file handle. Results are collected in memory and
    results.csv is written in (mechanism, point, trial) order on close, so the file does
    not depend on completion order.
    """

    def __init__(self, settings: 'BenchSettings', output_dir: str | Path | None = None) -> None:
        self.settings = settings
        self.output_dir = Path(output_dir or settings.output_dir)
        self._message_queue: queue.Queue[tuple[str, Any] | None] = queue.Queue(maxsize=100)
        self._writer_thread: threading.Thread | None = None
        self._shutdown = threading.Event()
        self._lock = threading.Lock()
        self._results: list[TrialResult] = []
        self._written: list[Path] = []
        self._errors: list[str] = []

    @property
    def results(self) -> list[TrialResult]:
        with self._lock:
            return list(self._results)

    @property
    def written(self) -> list[Path]:
        with self._lock:
            return list(self._written)

    @property
    def errors(self) -> list[str]:
        with self._lock:
            return list(self._errors)

    def open(self) -> None:
        """Create the output directory and start the writer thread."""
        if self._writer_thread is not None:
            return
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self._shutdown.clear()
        self._writer_thread = threading.Thread(target=self._write_loop, daemon=True)
        self._writer_thread.start()

    def close(self) -> None:
        """Drain the queue, stop the thread and write results.csv."""
        if self._writer_thread is None:
            return
        self._message_queue.put(None)
        self._writer_thread.join()
        self._writer_thread = None
        self._shutdown.set()
        self._write_results()

    def write_result(self, result: TrialResult) -> None:
        self._send('result', result)

    def write_trace(self, result: TrialResult) -> None:
        if result.trace is not None:
            self._send('trace', result)

    def write_failure(self, capture: 'FailureCapture') -> None:
        self._send('failure', capture.to_dict())

    def write_summary(
        self,
        config: 'ExperimentConfig',
        failures: int = 0,
        interrupted: bool = False,
        diagnostics: list[str] | None = None,
    ) -> Path:
        """Resolved config, runtime, aggregated table and run status as plain text."""
        table = aggregate(self.results)
        lines = [
            f'config_hash: {config.config_hash()}',
            f'mode: {config.mode}',
            f'seed: {config.seed}',
            f'trials: {config.trials}',
            f'status: {"interrupted" if interrupted else "complete"}',
            f'failures: {failures}',
            'runtime: ' + json.dumps(self.settings.get_runtime_info(), sort_keys=True),
            '',
            'config:',
            json.dumps(config.to_dict(), indent=2, sort_keys=True),
            '',
            'results:',
            table.to_string(index=False) if not table.empty else '(no results)',
        ]
        if diagnostics:
            lines += ['', 'diagnostics:'] + [f'  {d}' for d in diagnostics]
        path = self.output_dir / SUMMARY_FILE
        path.write_text('\n'.join(lines) + '\n', encoding='utf-8')
        self._mark_written(path)
        return path

    def write_probe(self, frame: pd.DataFrame) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.output_dir / PROBE_FILE
        frame.to_csv(path, index=False)
        self._mark_written(path)
        return path

    def _send(self, msg_type: str, payload: Any) -> None:
        """Queue a message; blocks while the queue is full so nothing is dropped."""
        if self._writer_thread is None:
            raise RuntimeError('ResultWriter is not open')
        self._message_queue.put((msg_type, payload))

    def _write_loop(self) -> None:
        """Main loop running in the background thread."""
        while True:
            message = self._message_queue.get()
            if message is None:
                return
            msg_type, payload = message
            try:
                self._handle_message(msg_type, payload)
            except Exception as e:
                with self._lock:
                    self._errors.append(f'{msg_type}: {e}')
                if self.settings.debug:
                    print(f'[CACI Bench] Error writing {msg_type}: {e}')

    def _handle_message(self, msg_type: str, payload: Any) -> None:
        if msg_type == 'result':
            with self._lock:
                self._results.append(payload)
        elif msg_type == 'trace':
            name = trace_file_name(payload.mechanism, payload.axis_value, payload.trial)
            path = self.output_dir / name
            payload.trace.to_frame().to_csv(path, index=False)
            self._mark_written(path)
        elif msg_type == 'failure':
            path = self.output_dir / FAILURES_FILE
            with path.open('a', encoding='utf-8') as fh:
                fh.write(json.dumps(payload, sort_keys=True) + '\n')
            self._mark_written(path)
        elif self.settings.debug:
            print(f'[CACI Bench] Unhandled message type: {msg_type}')

    def _write_results(self) -> None:
        path = self.output_dir / RESULTS_FILE
        results_frame(self.results).to_csv(path, index=False)
        self._mark_written(path)

    def _mark_written(self, path: Path) -> None:
        with self._lock:
            if path not in self._written:
                self._written.append(path)
