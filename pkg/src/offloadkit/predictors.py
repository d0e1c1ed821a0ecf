"""Streaming predictors.

Two exponential moving averages smooth the environment monitors (device CPU
workload and network bandwidth), and a nearest-neighbour lookup over the
execution history predicts how long a task will run on the device.
"""
from __future__ import annotations

import math
import socket
import threading
import time
from dataclasses import dataclass
from typing import Callable, Sequence

import psutil

from .errors import InsufficientHistoryError
from .history import HistoryRecord

#: Default number of smoothing periods for both monitor averages.
DEFAULT_PERIODS = 10

#: Default monitor sampling period in seconds.
DEFAULT_SAMPLE_PERIOD = 1.0

Probe = Callable[[], tuple[float, float]]


def smoothing_coefficient(n_periods: int) -> float:
    """Weighting decrease for an n-period average: 2 / (n_periods + 1)."""
    if not isinstance(n_periods, int) or isinstance(n_periods, bool) or n_periods < 1:
        raise ValueError(f"n_periods must be a positive int, got {n_periods!r}")
    return 2.0 / (n_periods + 1)


@dataclass(frozen=True)
class EmaState:
    """Recursive moving-average accumulator; ``current`` is None before the
    first sample."""

    n_periods: int
    alpha: float
    current: float | None = None

    def __post_init__(self) -> None:
        if self.alpha != smoothing_coefficient(self.n_periods):
            raise ValueError("alpha must equal 2 / (n_periods + 1) exactly")
        if self.current is not None and not math.isfinite(self.current):
            raise ValueError(f"current must be finite, got {self.current!r}")

    @property
    def initialized(self) -> bool:
        return self.current is not None


def ema_new(n_periods: int = DEFAULT_PERIODS) -> EmaState:
    """An empty accumulator awaiting its first sample."""
    return EmaState(n_periods=n_periods, alpha=smoothing_coefficient(n_periods))


def ema_init(first_sample: float, n_periods: int = DEFAULT_PERIODS) -> EmaState:
    """Seed the average: the first sample becomes the current value."""
    if not math.isfinite(first_sample):
        raise ValueError(f"sample must be finite, got {first_sample!r}")
    return EmaState(
        n_periods=n_periods,
        alpha=smoothing_coefficient(n_periods),
        current=float(first_sample),
    )


def ema_update(state: EmaState, sample: float) -> EmaState:
    """Fold one sample in: alpha * sample + (1 - alpha) * current."""
    if not state.initialized:
        raise ValueError("cannot update an uninitialized average")
    if not math.isfinite(sample):
        raise ValueError(f"sample must be finite, got {sample!r}")
    current = state.alpha * sample + (1.0 - state.alpha) * state.current
    return EmaState(n_periods=state.n_periods, alpha=state.alpha, current=current)


@dataclass(frozen=True)
class EnvironmentSample:
    """One time-stamped monitor reading."""

    timestamp: float
    value: float


@dataclass(frozen=True)
class TimeQuery:
    """Coordinates of an execution-time prediction."""

    application: str
    input_size: int
    avg_cpu_workload: float

    def __post_init__(self) -> None:
        if self.input_size < 0:
            raise ValueError(f"input_size must be >= 0, got {self.input_size}")
        if not 0 <= self.avg_cpu_workload <= 100:
            raise ValueError(
                f"avg_cpu_workload must be in [0, 100], got {self.avg_cpu_workload!r}"
            )


def predict_execution_time(
    records: Sequence[HistoryRecord], query: TimeQuery
) -> float:
    """Mean execution time of the two history records nearest to the query.

    Distance is Euclidean in the (input_size, avg_cpu_workload) plane with
    each axis min-max normalized over the application's records; an axis on
    which all records agree contributes nothing. Ties are broken by insertion
    order, so the result is deterministic for a given log.
    """
    matching = [r for r in records if r.application == query.application]
    if len(matching) < 2:
        raise InsufficientHistoryError(query.application, len(matching))

    size_lo = min(r.input_size for r in matching)
    size_hi = max(r.input_size for r in matching)
    load_lo = min(r.avg_cpu_workload for r in matching)
    load_hi = max(r.avg_cpu_workload for r in matching)

    def norm(value: float, lo: float, hi: float) -> float:
        return 0.0 if hi == lo else (value - lo) / (hi - lo)

    q_size = norm(query.input_size, size_lo, size_hi)
    q_load = norm(query.avg_cpu_workload, load_lo, load_hi)

    best: list[tuple[float, int]] = []
    for index, record in enumerate(matching):
        ds = norm(record.input_size, size_lo, size_hi) - q_size
        dw = norm(record.avg_cpu_workload, load_lo, load_hi) - q_load
        key = (ds * ds + dw * dw, index)
        if len(best) < 2:
            best.append(key)
            best.sort()
        elif key < best[1]:
            best[1] = key
            best.sort()
    first, second = best
    return (matching[first[1]].execution_time + matching[second[1]].execution_time) / 2.0


class Monitor:
    """Single-writer average over a probe's (timestamp, value) readings.

    Updates must come from one thread; reading ``state`` or ``prediction``
    is safe at any time because states are immutable snapshots.
    """

    def __init__(
        self,
        probe: Probe,
        n_periods: int = DEFAULT_PERIODS,
        sample_period: float = DEFAULT_SAMPLE_PERIOD,
    ):
        self._probe = probe
        self._state = ema_new(n_periods)
        self._last_timestamp: float | None = None
        self.sample_period = sample_period

    def sample(self) -> EnvironmentSample:
        timestamp, value = self._probe()
        if self._last_timestamp is not None and timestamp <= self._last_timestamp:
            raise ValueError(
                f"timestamps must strictly increase: {timestamp} after {self._last_timestamp}"
            )
        self._last_timestamp = timestamp
        if self._state.initialized:
            self._state = ema_update(self._state, value)
        else:
            self._state = ema_init(value, self._state.n_periods)
        return EnvironmentSample(timestamp=timestamp, value=value)

    @property
    def state(self) -> EmaState:
        return self._state

    @property
    def prediction(self) -> float:
        if not self._state.initialized:
            raise ValueError("monitor has not observed any sample yet")
        return self._state.current


def constant_probe(value: float) -> Probe:
    """Synthetic source that always reads the same value (ticking timestamps)."""
    counter = 0

    def probe() -> tuple[float, float]:
        nonlocal counter
        counter += 1
        return float(counter), float(value)

    return probe


def fixed_monitor(value: float, n_periods: int = DEFAULT_PERIODS) -> Monitor:
    """A monitor pre-seeded with one constant sample; handy for overrides."""
    monitor = Monitor(constant_probe(value), n_periods=n_periods)
    monitor.sample()
    return monitor


def cpu_probe() -> Probe:
    """OS-reported CPU utilization percent.

    The first reading primes the OS counter and reports utilization since
    interpreter start; later readings cover the interval between calls.
    """
    last = [0.0]

    def probe() -> tuple[float, float]:
        value = psutil.cpu_percent(interval=None)
        now = time.monotonic()
        if now <= last[0]:  # coarse clocks can repeat between fast calls
            now = math.nextafter(last[0], math.inf)
        last[0] = now
        return now, float(value)

    return probe


def loopback_bandwidth_probe(sample_bytes: int = 4 * 1024 * 1024) -> Probe:
    """Throughput of the local socket stack, measured by streaming bytes
    through a loopback socket pair."""
    chunk = b"\x00" * 65536
    last = [0.0]

    def probe() -> tuple[float, float]:
        left, right = socket.socketpair()
        received = [0]

        def drain() -> None:
            while received[0] < sample_bytes:
                data = right.recv(1 << 20)
                if not data:
                    break
                received[0] += len(data)

        reader = threading.Thread(target=drain, daemon=True)
        reader.start()
        start = time.perf_counter()
        remaining = sample_bytes
        while remaining > 0:
            piece = chunk if remaining >= len(chunk) else chunk[:remaining]
            left.sendall(piece)
            remaining -= len(piece)
        left.shutdown(socket.SHUT_WR)
        reader.join()
        elapsed = max(time.perf_counter() - start, 1e-9)
        left.close()
        right.close()
        now = time.monotonic()
        if now <= last[0]:
            now = math.nextafter(last[0], math.inf)
        last[0] = now
        return now, received[0] / elapsed

    return probe
