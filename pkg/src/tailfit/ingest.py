"""Latency-log CSV parsing and run-manifest plumbing.

Log format: header `run,duration_s` with an optional third `phase` column.
Durations are seconds; floats are written with repr so files round-trip
bit-exactly.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import LogFormatError

LOG_HEADER = ("run", "duration_s")
PHASE_HEADER = ("run", "duration_s", "phase")


@dataclass
class LatencyLog:
    """Parsed rows of (run index, duration, optional phase label)."""

    runs: np.ndarray
    durations: np.ndarray
    phases: list[str] | None
    source_path: str = ""
    source_mtime: float = 0.0
    skipped: list[tuple[int, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return self.durations.size

    @property
    def has_phases(self) -> bool:
        return self.phases is not None

    def phase_labels(self) -> list[str]:
        return sorted(set(self.phases)) if self.phases else []

    def for_phase(self, label: str) -> "LatencyLog":
        """Rows with the given phase label, in file order."""
        if not self.has_phases:
            raise LogFormatError(f"{self.source_path or 'log'} has no phase column")
        keep = [i for i, p in enumerate(self.phases) if p == label]
        if not keep:
            raise LogFormatError(
                f"no rows with phase {label!r}; available: {', '.join(self.phase_labels())}"
            )
        return LatencyLog(
            runs=self.runs[keep],
            durations=self.durations[keep],
            phases=[self.phases[i] for i in keep],
            source_path=self.source_path,
            source_mtime=self.source_mtime,
        )


def parse_log(path, skip_bad_rows: bool = False) -> LatencyLog:
    """Read and validate a latency log.

    Header problems always raise LogFormatError. Row problems raise with
    the 1-based line number, or are collected in .skipped when
    skip_bad_rows is set.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise LogFormatError(f"cannot read {path}: {exc}") from None
    lines = text.splitlines()
    if not lines:
        raise LogFormatError(f"{path}: empty file, expected header 'run,duration_s[,phase]'")
    header = tuple(tok.strip() for tok in lines[0].split(","))
    if header == LOG_HEADER:
        with_phase = False
    elif header == PHASE_HEADER:
        with_phase = True
    else:
        raise LogFormatError(
            f"{path}: line 1: expected header 'run,duration_s[,phase]', got {lines[0]!r}"
        )

    runs: list[int] = []
    durations: list[float] = []
    phases: list[str] = []
    skipped: list[tuple[int, str]] = []
    seen: set[tuple[int, str]] = set()

    def bad(lineno: int, reason: str):
        if skip_bad_rows:
            skipped.append((lineno, reason))
            return
        raise LogFormatError(f"{path}: line {lineno}: {reason}")

    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [tok.strip() for tok in line.split(",")]
        if len(parts) != len(header):
            bad(lineno, f"expected {len(header)} fields, got {len(parts)}")
            continue
        try:
            run = int(parts[0])
        except ValueError:
            bad(lineno, f"run index {parts[0]!r} is not an integer")
            continue
        try:
            duration = float(parts[1])
        except ValueError:
            bad(lineno, f"duration {parts[1]!r} is not a number")
            continue
        if not np.isfinite(duration) or duration < 0:
            bad(lineno, f"duration must be finite and >= 0, got {parts[1]}")
            continue
        phase = parts[2] if with_phase else ""
        if (run, phase) in seen:
            bad(lineno, f"duplicate run index {run} for phase {phase!r}")
            continue
        seen.add((run, phase))
        runs.append(run)
        durations.append(duration)
        phases.append(phase)

    try:
        mtime = os.stat(path).st_mtime
    except OSError:
        mtime = 0.0
    return LatencyLog(
        runs=np.asarray(runs, dtype=int),
        durations=np.asarray(durations, dtype=float),
        phases=phases if with_phase else None,
        source_path=str(path),
        source_mtime=mtime,
        skipped=skipped,
    )


def write_log(path, durations, runs=None, phases=None) -> None:
    """Write a latency log; inverse of parse_log."""
    durations = np.asarray(durations, dtype=float)
    if runs is None:
        runs = np.arange(durations.size)
    lines = []
    if phases is None:
        lines.append(",".join(LOG_HEADER))
        for r, d in zip(runs, durations):
            lines.append(f"{int(r)},{repr(float(d))}")
    else:
        lines.append(",".join(PHASE_HEADER))
        for r, d, p in zip(runs, durations, phases):
            lines.append(f"{int(r)},{repr(float(d))},{p}")
    Path(path).write_text("\n".join(lines) + "\n")


def write_manifest(path, entries: dict) -> None:
    """Flat key=value manifest recording a run's resolved configuration."""
    lines = [f"{key}={value}" for key, value in entries.items()]
    Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path) -> dict:
    entries: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise LogFormatError(f"{path}: line {lineno}: expected key=value, got {line!r}")
        entries[key] = value
    return entries
