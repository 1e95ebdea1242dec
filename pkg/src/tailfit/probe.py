"""Desk-scale timed-write harness.

Measures a synchronous one-to-many write against local directory targets:
metadata phases (open/close) are timed separately from the parallel data
phase, whose duration is gated by the slowest target writer. This reproduces
the measurement structure, not any particular storage hardware's numbers.
"""
from __future__ import annotations

import os
import shutil
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ParameterError, ProbeError

SYNC_MODES = ("synchronous-flush", "best-effort")


@dataclass(frozen=True)
class ProbeConfig:
    """Write-campaign settings.

    total_bytes is split evenly across targets; each writer issues
    stripe_bytes-sized chunks, flushing after every chunk in
    synchronous-flush mode. best-effort skips flushes entirely and is only
    suitable for smoke tests.
    """

    targets: tuple
    total_bytes: int = 512 * 2**20
    stripe_bytes: int = 2**20
    runs: int = 400
    sync_mode: str = "synchronous-flush"
    seed: int = 0
    keep_files: bool = False  # leave the last run's files behind (checksum checks)

    def __post_init__(self):
        targets = tuple(Path(t) for t in self.targets)
        if len(targets) < 1:
            raise ParameterError("need at least one target directory")
        object.__setattr__(self, "targets", targets)
        if self.total_bytes < 1 or self.total_bytes % len(targets) != 0:
            raise ParameterError(
                f"total_bytes ({self.total_bytes}) must be positive and divisible "
                f"by the number of targets ({len(targets)})"
            )
        if not 1 <= self.stripe_bytes <= self.per_target_bytes:
            raise ParameterError(
                f"stripe_bytes ({self.stripe_bytes}) must lie in [1, per-target share "
                f"{self.per_target_bytes}]"
            )
        if self.runs < 1:
            raise ParameterError(f"runs must be >= 1, got {self.runs}")
        if self.sync_mode not in SYNC_MODES:
            raise ParameterError(f"sync_mode must be one of {SYNC_MODES}, got {self.sync_mode!r}")
        if not (isinstance(self.seed, int) and self.seed >= 0):
            raise ParameterError(f"seed must be a nonnegative integer, got {self.seed!r}")

    @property
    def per_target_bytes(self) -> int:
        return self.total_bytes // len(self.targets)


@dataclass(frozen=True)
class ProbeRecord:
    """One run's timings: serialized metadata phases and the gated data phase."""

    run: int
    meta_open_s: float
    data_write_s: float
    meta_close_s: float
    target_completion_s: tuple


def _preflight(config: ProbeConfig) -> None:
    for t in config.targets:
        if not t.is_dir() or not os.access(t, os.W_OK):
            raise ProbeError(f"target {t} is not a writable directory")
        try:
            free = shutil.disk_usage(t).free
        except OSError as exc:
            raise ProbeError(f"cannot stat free space on {t}: {exc}") from None
        if free < config.per_target_bytes:
            raise ProbeError(
                f"insufficient space on {t}: need {config.per_target_bytes} bytes, "
                f"have {free}"
            )


def _payloads(config: ProbeConfig) -> list[bytes]:
    """Per-target write buffers, deterministic from (seed, target index)."""
    return [
        np.random.default_rng([config.seed, j]).bytes(config.per_target_bytes)
        for j in range(len(config.targets))
    ]


def _timed_run(
    run: int,
    config: ProbeConfig,
    paths: list[Path],
    payloads: list[bytes],
    clock,
) -> ProbeRecord:
    n = len(paths)
    flush = config.sync_mode == "synchronous-flush"

    t0 = clock()
    fds = []
    try:
        for p in paths:
            fds.append(os.open(p, os.O_WRONLY | os.O_CREAT | os.O_TRUNC))
    except OSError as exc:
        for fd in fds:
            os.close(fd)
        raise ProbeError(f"run {run}: cannot open target file: {exc}") from None
    meta_open_s = clock() - t0

    barrier = threading.Barrier(n + 1)
    completions = [0.0] * n
    failures: list[str] = []
    start_box = [0.0]

    def writer(j: int):
        try:
            barrier.wait()
            fd = fds[j]
            payload = memoryview(payloads[j])
            for off in range(0, len(payload), config.stripe_bytes):
                chunk = payload[off : off + config.stripe_bytes]
                while len(chunk) > 0:  # os.write may be partial
                    chunk = chunk[os.write(fd, chunk) :]
                if flush:
                    os.fsync(fd)
            completions[j] = clock() - start_box[0]
        except (OSError, threading.BrokenBarrierError) as exc:
            failures.append(f"target {j}: {exc}")
            completions[j] = clock() - start_box[0]

    threads = [threading.Thread(target=writer, args=(j,)) for j in range(n)]
    for th in threads:
        th.start()
    # the timer starts before the barrier releases any writer
    start_box[0] = clock()
    barrier.wait()
    for th in threads:
        th.join()
    data_write_s = clock() - start_box[0]

    t1 = clock()
    for fd in fds:
        os.close(fd)
    meta_close_s = clock() - t1

    if failures:
        for p in paths:
            p.unlink(missing_ok=True)
        raise ProbeError(f"run {run} aborted: " + "; ".join(failures))
    return ProbeRecord(
        run=run,
        meta_open_s=meta_open_s,
        data_write_s=data_write_s,
        meta_close_s=meta_close_s,
        target_completion_s=tuple(completions),
    )


def run_probe(config: ProbeConfig, clock=time.perf_counter) -> list[ProbeRecord]:
    """Execute the campaign: one discarded warm-up run, then config.runs
    recorded runs. Returns records in run order."""
    _preflight(config)
    payloads = _payloads(config)
    paths = [t / f"tailfit_probe_{j:02d}.dat" for j, t in enumerate(config.targets)]
    done = False
    try:
        _timed_run(-1, config, paths, payloads, clock)  # warm-up, discarded
        records = [_timed_run(r, config, paths, payloads, clock) for r in range(config.runs)]
        done = True
        return records
    finally:
        if not (done and config.keep_files):
            for p in paths:
                try:
                    p.unlink(missing_ok=True)
                except OSError:
                    pass


def records_to_log_rows(records: list[ProbeRecord]):
    """Flatten records into (runs, durations, phases) rows for the latency-log
    CSV: one row per phase plus one per target completion."""
    runs: list[int] = []
    durations: list[float] = []
    phases: list[str] = []
    for rec in records:
        for phase, value in (
            ("meta_open", rec.meta_open_s),
            ("data_write", rec.data_write_s),
            ("meta_close", rec.meta_close_s),
        ):
            runs.append(rec.run)
            durations.append(value)
            phases.append(phase)
        for j, c in enumerate(rec.target_completion_s):
            runs.append(rec.run)
            durations.append(c)
            phases.append(f"target_{j:02d}")
    return runs, durations, phases
