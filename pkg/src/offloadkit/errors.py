"""Exception types shared across the package."""
from __future__ import annotations


class OffloadError(Exception):
    """Base class for all package-specific failures."""


class InsufficientHistoryError(OffloadError):
    """Fewer than two usable history records exist for a workload."""

    def __init__(self, application: str, available: int):
        super().__init__(
            f"need at least 2 history records for {application!r}, have {available}"
        )
        self.application = application
        self.available = available


class HistoryCorruptError(OffloadError):
    """A non-trailing history line could not be parsed."""


class FrameError(OffloadError):
    """A wire frame is malformed."""


class TruncatedFrameError(FrameError):
    """The buffer or stream ended before a complete frame."""


class WorkloadError(OffloadError):
    """A workload payload failed to parse or execute."""


class NegativeCycleError(WorkloadError):
    """The path-finder input contains a negative cycle reachable from the source."""


class TransportError(OffloadError):
    """Connection, I/O or timeout failure during a remote call."""


class RemoteExecutionError(OffloadError):
    """The server answered with an error frame; the message is its reason."""


class NoBreakevenError(OffloadError):
    """The energy trade-off does not change sign over the requested range."""


class ConfigError(OffloadError):
    """A configuration file or value is unusable."""
