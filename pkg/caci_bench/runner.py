"""Coordinates a sweep: trial pool, output writer, failure capture and signals."""

from __future__ import annotations

import atexit
import signal
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

from .config import BenchSettings, ExperimentConfig
from .exceptions import FailureHandler
from .output import ResultWriter
from .simulation import SweepResult, TrialResult, sweep


class BenchRunner:
    """Runs one experiment config and owns everything that outlives a single trial."""

    def __init__(self, config: ExperimentConfig, settings: BenchSettings) -> None:
        self.config = config
        self.settings = settings
        self._started = False
        self._stop = threading.Event()
        self._executor: ThreadPoolExecutor | None = None
        self._prev_sigterm: Any = None
        self._prev_sigint: Any = None
        self._signals_installed = False
        self._diagnostics: list[str] = []

        self._writer = ResultWriter(settings)
        self._failure_handler = FailureHandler(settings, self._writer.write_failure)

    @property
    def output_dir(self) -> Path:
        return self._writer.output_dir

    @property
    def interrupted(self) -> bool:
        return self._stop.is_set()

    @property
    def failure_count(self) -> int:
        return self._failure_handler.failure_count

    @property
    def written(self) -> list[Path]:
        return self._writer.written

    def start(self) -> None:
        """Open the output directory, start the trial pool and install signal handlers."""
        if self._started:
            return

        self._writer.open()
        if self.settings.jobs > 1:
            self._executor = ThreadPoolExecutor(
                max_workers=self.settings.jobs, thread_name_prefix='caci-trial'
            )

        atexit.register(self._cleanup)
        # Signal handlers can only be installed from the main thread
        if threading.current_thread() is threading.main_thread():
            self._prev_sigterm = signal.signal(signal.SIGTERM, self._signal_handler)
            self._prev_sigint = signal.signal(signal.SIGINT, self._signal_handler)
            self._signals_installed = True

        self._started = True

        if self.settings.debug:
            print(f'[CACI Bench] Runner started ({self.settings.jobs} jobs, output {self.output_dir})')

    def stop(self) -> None:
        """Stop the pool, flush output and restore the previous signal handlers."""
        if not self._started:
            return

        self._cleanup()
        atexit.unregister(self._cleanup)
        self._started = False

    def request_stop(self) -> None:
        """Cooperative stop: no new trials start, finished ones are still written."""
        self._stop.set()

    def run(self) -> SweepResult:
        """Run the configured sweep and write results.csv, traces and summary.txt."""
        self.start()
        config = self.config
        print(
            f'[CACI Bench] Running {", ".join(config.mechanisms)} ({config.mode}) over '
            f'{config.sweep.axis if config.sweep.values else "budget"} '
            f'with {len(config.axis_values)} point(s) x {config.trials} trial(s)'
        )
        try:
            result = sweep(
                axis=config.sweep.axis if config.sweep.values else 'budget',
                points=config.axis_values,
                trials=config.trials,
                mechanisms=config.mechanisms,
                base_config=config,
                seed=config.seed,
                executor=self._executor,
                keep_traces=bool(self.settings.emit_traces or self.settings.debug),
                on_result=self._on_result,
                on_failure=self.capture_failure,
                should_stop=self._stop.is_set,
            )
        finally:
            self.stop()

        summary = self._writer.write_summary(
            config,
            failures=self.failure_count,
            interrupted=self.interrupted,
            diagnostics=self._diagnostics,
        )
        for error in self._writer.errors:
            print(f'[CACI Bench] Output error: {error}')
        print(f'[CACI Bench] Wrote {len(self.written)} file(s) to {self.output_dir} ({summary.name})')
        return result

    def capture_failure(self, exception: BaseException, context: dict | None = None) -> None:
        """Record a trial failure; it is appended to failures.jsonl."""
        self._failure_handler.capture(exception, context)

    def _on_result(self, result: TrialResult) -> None:
        self._writer.write_result(result)
        if result.trace is None:
            return
        for message in result.trace.diagnostics:
            if message not in self._diagnostics:
                self._diagnostics.append(message)
                if self.settings.debug:
                    print(f'[CACI Bench] {result.mechanism}: {message}')
        if self.settings.emit_traces:
            self._writer.write_trace(result)
        if self.settings.debug:
            print(
                f'[CACI Bench] {result.mechanism} {result.axis}={result.axis_value:g} '
                f'trial {result.trial}: reward {result.cumulative_reward_expected:.3f}, '
                f'regret {result.regret_expected:.3f}'
            )

    def _cleanup(self) -> None:
        """Cleanup all resources."""
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None

        self._writer.close()

        if self._signals_installed:
            signal.signal(signal.SIGTERM, self._prev_sigterm)
            signal.signal(signal.SIGINT, self._prev_sigint)
            self._signals_installed = False

        if self.settings.debug:
            print('[CACI Bench] Runner stopped')

    def _signal_handler(self, signum: int, frame: object) -> None:
        """Handle shutdown signals."""
        print('[CACI Bench] Stop requested; finishing running trials')
        self.request_stop()

        # Chain to a previous handler that someone else installed
        prev = self._prev_sigterm if signum == signal.SIGTERM else self._prev_sigint
        if callable(prev) and prev not in (signal.default_int_handler, signal.SIG_DFL, signal.SIG_IGN):
            prev(signum, frame)
