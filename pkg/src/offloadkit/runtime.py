"""Local and remote execution managers plus the offloading proxy.

The local manager runs a workload in-process and feeds the history log; the
remote manager is a threaded TCP server speaking the framed protocol; the
proxy ships a request and blocks for the response.
"""
from __future__ import annotations

import socket
import socketserver
import threading
import time
from dataclasses import dataclass
from enum import Enum

from .errors import RemoteExecutionError, TransportError, WorkloadError, FrameError
from .history import HistoryRecord
from .predictors import Monitor
from .protocol import (
    DEFAULT_MAX_PAYLOAD,
    Frame,
    KIND_ERROR,
    KIND_REQUEST,
    KIND_RESPONSE,
    read_frame,
    write_frame,
)
from .workloads import REGISTRY, TaskSpec, by_wire_id

DEFAULT_TIMEOUT = 60.0


class ExecutionSite(str, Enum):
    LOCAL = "local"
    REMOTE = "remote"


@dataclass(frozen=True)
class TaskResult:
    application: str
    output_payload: bytes
    wall_time: float
    executed_at: ExecutionSite


def parse_address(address: str | tuple[str, int]) -> tuple[str, int]:
    if isinstance(address, tuple):
        return address
    host, _, port_text = address.rpartition(":")
    if not host or not port_text.isdigit():
        raise ValueError(f"address must look like host:port, got {address!r}")
    return host, int(port_text)


def run_local(
    task: TaskSpec,
    cpu_monitor: Monitor,
    history,
    *,
    slowdown: float = 1.0,
) -> TaskResult:
    """Execute in-process, then log (application, size, cpu, wall time).

    ``slowdown`` >= 1 stretches the execution with sleep to emulate a device
    that is that factor slower than this host; the logged time includes it.
    Nothing is logged when the workload fails.
    """
    if task.input_payload is None:
        raise ValueError("task has no payload to execute")
    if slowdown < 1.0:
        raise ValueError(f"slowdown must be >= 1, got {slowdown!r}")
    workload = REGISTRY[task.application]
    start = time.perf_counter()
    output = workload.run(task.input_payload)
    elapsed = time.perf_counter() - start
    if slowdown > 1.0:
        time.sleep(elapsed * (slowdown - 1.0))
        elapsed *= slowdown
    elapsed = max(elapsed, 1e-9)
    history.append(
        HistoryRecord(
            application=task.application,
            input_size=task.input_size,
            avg_cpu_workload=cpu_monitor.prediction,
            execution_time=elapsed,
        )
    )
    return TaskResult(
        application=task.application,
        output_payload=output,
        wall_time=elapsed,
        executed_at=ExecutionSite.LOCAL,
    )


def run_remote(
    task: TaskSpec,
    endpoint: str | tuple[str, int],
    *,
    timeout: float = DEFAULT_TIMEOUT,
    max_payload: int = DEFAULT_MAX_PAYLOAD,
) -> TaskResult:
    """Ship the input, block for the response frame, return the parsed result."""
    if task.input_payload is None:
        raise ValueError("task has no payload to ship")
    host, port = parse_address(endpoint)
    workload = REGISTRY[task.application]
    start = time.perf_counter()
    try:
        connection = socket.create_connection((host, port), timeout=timeout)
    except OSError as exc:
        raise TransportError(f"cannot connect to {host}:{port}: {exc}") from exc
    try:
        connection.settimeout(timeout)
        stream = connection.makefile("rwb")
        try:
            write_frame(
                stream,
                Frame(kind=KIND_REQUEST, application_id=workload.wire_id, payload=task.input_payload),
            )
            frame = read_frame(stream, max_payload=max_payload)
        except socket.timeout as exc:
            raise TransportError(f"no response within {timeout} s") from exc
        except OSError as exc:
            raise TransportError(f"transport failure: {exc}") from exc
        finally:
            stream.close()
    finally:
        connection.close()
    if frame is None:
        raise TransportError("server closed the connection without answering")
    if frame.kind == KIND_ERROR:
        raise RemoteExecutionError(frame.payload.decode("utf-8", "replace"))
    if frame.kind != KIND_RESPONSE or frame.application_id != workload.wire_id:
        raise TransportError(
            f"unexpected frame kind={frame.kind} application_id={frame.application_id}"
        )
    return TaskResult(
        application=task.application,
        output_payload=frame.payload,
        wall_time=max(time.perf_counter() - start, 1e-9),
        executed_at=ExecutionSite.REMOTE,
    )


def _send_error(stream, application_id: int, reason: str) -> None:
    try:
        write_frame(
            stream,
            Frame(kind=KIND_ERROR, application_id=application_id, payload=reason.encode("utf-8")),
        )
    except OSError:
        pass  # peer already gone


class _ConnectionHandler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        max_payload = self.server.max_payload  # type: ignore[attr-defined]
        while True:
            try:
                frame = read_frame(self.rfile, max_payload=max_payload)
            except FrameError as exc:
                # the stream position is unrecoverable: report and drop the link
                _send_error(self.wfile, 0, str(exc))
                return
            if frame is None:
                return
            if frame.kind != KIND_REQUEST:
                _send_error(self.wfile, frame.application_id, f"expected a request frame, got kind {frame.kind}")
                return
            workload = by_wire_id(frame.application_id)
            if workload is None:
                _send_error(self.wfile, frame.application_id, f"unknown application {frame.application_id}")
                continue
            try:
                output = workload.run(frame.payload)
            except WorkloadError as exc:
                _send_error(self.wfile, frame.application_id, str(exc))
                continue
            try:
                write_frame(
                    self.wfile,
                    Frame(kind=KIND_RESPONSE, application_id=workload.wire_id, payload=output),
                )
            except OSError:
                return


class _Server(socketserver.ThreadingTCPServer):
    daemon_threads = True
    allow_reuse_address = True


class OffloadServer:
    """Remote execution manager: one thread per connection, frames in order
    per connection."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        *,
        max_payload: int = DEFAULT_MAX_PAYLOAD,
    ):
        self._server = _Server((host, port), _ConnectionHandler)
        self._server.max_payload = max_payload  # type: ignore[attr-defined]
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._server.server_address[:2]
        return host, port

    def start(self) -> "OffloadServer":
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)

    def __enter__(self) -> "OffloadServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.shutdown()


def serve(
    bind: str | tuple[str, int], *, max_payload: int = DEFAULT_MAX_PAYLOAD
) -> None:
    """Run the remote execution manager in the calling thread until interrupted."""
    host, port = parse_address(bind)
    server = OffloadServer(host, port, max_payload=max_payload)
    try:
        server.serve_forever()
    finally:
        server.shutdown()


def dispatch(
    task: TaskSpec,
    to_remote: bool,
    *,
    cpu_monitor: Monitor,
    history,
    remote: str | tuple[str, int] | None = None,
    fallback_local: bool = False,
    timeout: float = DEFAULT_TIMEOUT,
    slowdown: float = 1.0,
) -> TaskResult:
    """Route an already-made verdict to the right execution manager.

    A failed remote call surfaces unless ``fallback_local`` asks for a local
    retry instead.
    """
    if not to_remote:
        return run_local(task, cpu_monitor, history, slowdown=slowdown)
    if remote is None:
        raise TransportError("offload verdict but no remote endpoint configured")
    try:
        return run_remote(task, remote, timeout=timeout)
    except (TransportError, RemoteExecutionError):
        if fallback_local:
            return run_local(task, cpu_monitor, history, slowdown=slowdown)
        raise
