"""Append-only execution history.

One record per line in the form
``application,input_size,avg_cpu_workload,execution_time`` with floats in
round-trip precision. A torn trailing line (partial append) is dropped on
load; a malformed line anywhere else is treated as corruption.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import HistoryCorruptError

_FIELD_SEPARATOR = ","
_FORBIDDEN_IN_NAME = (",", "\n", "\r")


@dataclass(frozen=True)
class HistoryRecord:
    """One logged execution: what ran, how big, how loaded, how long."""

    application: str
    input_size: int
    avg_cpu_workload: float
    execution_time: float

    def __post_init__(self) -> None:
        if not isinstance(self.application, str) or not self.application:
            raise ValueError("application must be a non-empty string")
        if any(ch in self.application for ch in _FORBIDDEN_IN_NAME):
            raise ValueError(f"application name {self.application!r} contains separators")
        if not isinstance(self.input_size, int) or isinstance(self.input_size, bool):
            raise ValueError(f"input_size must be an int, got {self.input_size!r}")
        if self.input_size < 0:
            raise ValueError(f"input_size must be >= 0, got {self.input_size}")
        if not math.isfinite(self.avg_cpu_workload) or not 0 <= self.avg_cpu_workload <= 100:
            raise ValueError(
                f"avg_cpu_workload must be in [0, 100], got {self.avg_cpu_workload!r}"
            )
        if not math.isfinite(self.execution_time) or self.execution_time <= 0:
            raise ValueError(
                f"execution_time must be > 0, got {self.execution_time!r}"
            )


def format_record(record: HistoryRecord) -> str:
    """Serialize a record to its single-line storage form (with newline)."""
    return (
        f"{record.application},{record.input_size},"
        f"{record.avg_cpu_workload!r},{record.execution_time!r}\n"
    )


def parse_record(line: str) -> HistoryRecord:
    """Parse one storage line; raises ValueError on any malformation."""
    parts = line.split(_FIELD_SEPARATOR)
    if len(parts) != 4:
        raise ValueError(f"expected 4 fields, got {len(parts)}: {line!r}")
    application, size_text, cpu_text, time_text = parts
    return HistoryRecord(
        application=application,
        input_size=int(size_text),
        avg_cpu_workload=float(cpu_text),
        execution_time=float(time_text),
    )


def _filter(records: Iterable[HistoryRecord], application: str | None):
    if application is None:
        return tuple(records)
    return tuple(r for r in records if r.application == application)


class HistoryLog:
    """File-backed append-only log; single writer, snapshot readers."""

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)

    def append(self, record: HistoryRecord) -> None:
        if not isinstance(record, HistoryRecord):
            raise TypeError(f"expected HistoryRecord, got {type(record).__name__}")
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(format_record(record))
            fh.flush()
            os.fsync(fh.fileno())

    def append_many(self, records: Iterable[HistoryRecord]) -> int:
        count = 0
        with open(self.path, "a", encoding="utf-8") as fh:
            for record in records:
                if not isinstance(record, HistoryRecord):
                    raise TypeError(
                        f"expected HistoryRecord, got {type(record).__name__}"
                    )
                fh.write(format_record(record))
                count += 1
            fh.flush()
            os.fsync(fh.fileno())
        return count

    def snapshot(self, application: str | None = None) -> tuple[HistoryRecord, ...]:
        """Immutable copy of all records (optionally one application's), in order."""
        return _filter(self._load(), application)

    def seed_from(self, source: str | os.PathLike) -> int:
        """Ingest a pre-generated log file, appending its records; returns count."""
        records = _read_log_file(Path(source))
        return self.append_many(records)

    def _load(self) -> list[HistoryRecord]:
        try:
            return _read_log_file(self.path)
        except FileNotFoundError:
            return []


def _read_log_file(path: Path) -> list[HistoryRecord]:
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    # Everything after the final newline is a torn append; drop it silently.
    lines.pop()
    records = []
    for index, line in enumerate(lines):
        try:
            records.append(parse_record(line))
        except ValueError as exc:
            raise HistoryCorruptError(
                f"{path}: line {index + 1}: {exc}"
            ) from exc
    return records


class MemoryHistory:
    """In-memory stand-in for HistoryLog with the same reader/writer surface."""

    def __init__(self, records: Iterable[HistoryRecord] = ()):
        self._records: list[HistoryRecord] = list(records)

    def append(self, record: HistoryRecord) -> None:
        if not isinstance(record, HistoryRecord):
            raise TypeError(f"expected HistoryRecord, got {type(record).__name__}")
        self._records.append(record)

    def append_many(self, records: Iterable[HistoryRecord]) -> int:
        count = 0
        for record in records:
            self.append(record)
            count += 1
        return count

    def snapshot(self, application: str | None = None) -> tuple[HistoryRecord, ...]:
        return _filter(self._records, application)
