"""The four executable workloads and their registry.

Each workload maps an input byte payload to an output byte payload. Formats
are line-oriented ASCII except the image workload, which takes a ``W H``
header line followed by exactly W*H raw grayscale bytes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NegativeCycleError, WorkloadError

INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1
INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

#: Output size of the counting workloads: a small decimal number.
SMALL_RESULT_BYTES = 24

#: Bytes per node in a path-finder result line estimate.
PATHFINDER_RESULT_PER_NODE = 32

#: Assumed bytes per edge line when only the input size is known.
PATHFINDER_BYTES_PER_EDGE = 24

# Keeps a hostile header from allocating unbounded node arrays on the server.
_MAX_GRAPH_NODES = 5_000_000
_MAX_IMAGE_PIXELS = 64_000_000

_SORT_CUTOFF = 16


# --- sort ------------------------------------------------------------------

def _parse_int_lines(payload: bytes) -> list[int]:
    try:
        text = payload.decode("ascii")
    except UnicodeDecodeError as exc:
        raise WorkloadError(f"sort input is not ASCII: {exc}") from exc
    if not text:
        return []
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    values = []
    for number, line in enumerate(lines, start=1):
        try:
            value = int(line)
        except ValueError:
            raise WorkloadError(f"sort input line {number} is not an integer: {line!r}") from None
        if not INT32_MIN <= value <= INT32_MAX:
            raise WorkloadError(f"sort input line {number} outside 32-bit range: {value}")
        values.append(value)
    return values


def _insertion_sort(values: list[int], lo: int, hi: int) -> None:
    for i in range(lo + 1, hi + 1):
        item = values[i]
        j = i - 1
        while j >= lo and values[j] > item:
            values[j + 1] = values[j]
            j -= 1
        values[j + 1] = item


def _partition(values: list[int], lo: int, hi: int) -> int:
    mid = (lo + hi) // 2
    # order the three candidates; the median lands in the middle and the
    # outer two act as scan sentinels
    if values[mid] < values[lo]:
        values[mid], values[lo] = values[lo], values[mid]
    if values[hi] < values[lo]:
        values[hi], values[lo] = values[lo], values[hi]
    if values[hi] < values[mid]:
        values[hi], values[mid] = values[mid], values[hi]
    pivot = values[mid]
    i, j = lo, hi
    while True:
        i += 1
        while values[i] < pivot:
            i += 1
        j -= 1
        while values[j] > pivot:
            j -= 1
        if i >= j:
            return j
        values[i], values[j] = values[j], values[i]


def quicksort(values: list[int]) -> None:
    """In-place quicksort: median-of-three pivot, insertion sort below 16."""
    stack = [(0, len(values) - 1)]
    while stack:
        lo, hi = stack.pop()
        while hi - lo + 1 > _SORT_CUTOFF:
            split = _partition(values, lo, hi)
            if split - lo < hi - split:
                stack.append((split + 1, hi))
                hi = split
            else:
                stack.append((lo, split))
                lo = split + 1
        _insertion_sort(values, lo, hi)


def run_sort(payload: bytes) -> bytes:
    values = _parse_int_lines(payload)
    quicksort(values)
    if not values:
        return b""
    return "\n".join(map(str, values)).encode("ascii") + b"\n"


# --- path finder -------------------------------------------------------------

def _parse_graph(payload: bytes) -> tuple[int, int, list[tuple[int, int, int]]]:
    try:
        text = payload.decode("ascii")
    except UnicodeDecodeError as exc:
        raise WorkloadError(f"graph input is not ASCII: {exc}") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise WorkloadError("graph input is empty")
    header = lines[0].split()
    if len(header) != 3:
        raise WorkloadError(f"graph header must be 'V E src', got {lines[0]!r}")
    try:
        node_count, edge_count, source = (int(part) for part in header)
    except ValueError:
        raise WorkloadError(f"graph header must be integers, got {lines[0]!r}") from None
    if node_count < 1:
        raise WorkloadError(f"graph must have at least one node, got {node_count}")
    if node_count > _MAX_GRAPH_NODES:
        raise WorkloadError(f"graph too large: {node_count} nodes")
    if edge_count < 0 or edge_count != len(lines) - 1:
        raise WorkloadError(
            f"graph declares {edge_count} edges but has {len(lines) - 1} edge lines"
        )
    if not 0 <= source < node_count:
        raise WorkloadError(f"source {source} outside [0, {node_count})")
    edges = []
    for number, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 3:
            raise WorkloadError(f"edge line {number} must be 'u v w', got {line!r}")
        try:
            u, v, w = (int(part) for part in parts)
        except ValueError:
            raise WorkloadError(f"edge line {number} must be integers, got {line!r}") from None
        if not 0 <= u < node_count or not 0 <= v < node_count:
            raise WorkloadError(f"edge line {number} references missing node: {line!r}")
        if not INT64_MIN <= w <= INT64_MAX:
            raise WorkloadError(f"edge line {number} weight outside 64-bit range: {w}")
        edges.append((u, v, w))
    return node_count, source, edges


def shortest_path_tree(
    node_count: int, source: int, edges: list[tuple[int, int, int]]
) -> tuple[list[int | None], list[int]]:
    """Single-source distances and a deterministic parent array.

    Edge relaxation runs the classic V-1 rounds plus a detection round; a
    negative cycle reachable from the source raises. Parents are then grown
    as a tree over tight edges, preferring the lowest parent id among nodes
    already attached (this keeps the result acyclic even with zero-weight
    cycles and independent of edge order).
    """
    dist: list[int | None] = [None] * node_count
    dist[source] = 0
    for _ in range(node_count - 1):
        changed = False
        for u, v, w in edges:
            du = dist[u]
            if du is None:
                continue
            candidate = du + w
            if dist[v] is None or candidate < dist[v]:
                dist[v] = candidate
                changed = True
        if not changed:
            break
    for u, v, w in edges:
        du = dist[u]
        if du is not None and (dist[v] is None or du + w < dist[v]):
            raise NegativeCycleError("graph contains a negative cycle reachable from the source")

    tight: dict[int, list[int]] = {}
    for u, v, w in edges:
        if v == source or dist[u] is None or dist[v] is None:
            continue
        if dist[u] + w == dist[v]:
            tight.setdefault(v, []).append(u)
    for candidates in tight.values():
        candidates.sort()

    parent = [-1] * node_count
    in_tree = [False] * node_count
    in_tree[source] = True
    grew = True
    while grew:
        grew = False
        for v in range(node_count):
            if in_tree[v] or dist[v] is None:
                continue
            for u in tight.get(v, ()):
                if in_tree[u]:
                    parent[v] = u
                    in_tree[v] = True
                    grew = True
                    break
    return dist, parent


def run_pathfinder(payload: bytes) -> bytes:
    node_count, source, edges = _parse_graph(payload)
    dist, parent = shortest_path_tree(node_count, source, edges)
    lines = []
    for node in range(node_count):
        d = "inf" if dist[node] is None else str(dist[node])
        lines.append(f"{node} {parent[node]} {d}")
    return ("\n".join(lines) + "\n").encode("ascii")


# --- word count --------------------------------------------------------------

def run_wordcount(payload: bytes) -> bytes:
    try:
        text = payload.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise WorkloadError(f"word count input is not UTF-8: {exc}") from exc
    return f"{len(text.split())}\n".encode("ascii")


# --- face finder --------------------------------------------------------------

#: Square window side for the brightness convolution.
FACE_WINDOW = 8

#: Mean pixel brightness a window must reach to count as a detection.
FACE_THRESHOLD = 160


def _count_bright_peaks(image: np.ndarray) -> int:
    height, width = image.shape
    k = FACE_WINDOW
    if height < k or width < k:
        return 0
    rows = height - k + 1
    cols = width - k + 1
    response = np.zeros((rows, cols), dtype=np.int64)
    # direct window summation: work scales with pixels times window area
    for dy in range(k):
        for dx in range(k):
            response += image[dy : dy + rows, dx : dx + cols]
    padded = np.full((rows + 2, cols + 2), -1, dtype=np.int64)
    padded[1:-1, 1:-1] = response
    peak = response >= FACE_THRESHOLD * k * k
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            peak &= response > padded[1 + dy : 1 + dy + rows, 1 + dx : 1 + dx + cols]
    return int(peak.sum())


def run_facefinder(payload: bytes) -> bytes:
    header, separator, body = payload.partition(b"\n")
    if not separator:
        raise WorkloadError("image input missing 'W H' header line")
    parts = header.split()
    if len(parts) != 2:
        raise WorkloadError(f"image header must be 'W H', got {header!r}")
    try:
        width, height = int(parts[0]), int(parts[1])
    except ValueError:
        raise WorkloadError(f"image header must be integers, got {header!r}") from None
    if width < 1 or height < 1:
        raise WorkloadError(f"image dimensions must be positive, got {width}x{height}")
    if width * height > _MAX_IMAGE_PIXELS:
        raise WorkloadError(f"image too large: {width}x{height}")
    if len(body) != width * height:
        raise WorkloadError(
            f"image body is {len(body)} bytes, expected {width * height}"
        )
    image = np.frombuffer(body, dtype=np.uint8).reshape(height, width).astype(np.int64)
    return f"{_count_bright_peaks(image)}\n".encode("ascii")


# --- registry -----------------------------------------------------------------

def _pathfinder_result_from_payload(payload: bytes) -> int:
    node_count, _, _ = _parse_graph(payload)
    return PATHFINDER_RESULT_PER_NODE * node_count


def _pathfinder_result_from_size(input_size: int) -> int:
    return PATHFINDER_RESULT_PER_NODE * max(1, int(input_size) // PATHFINDER_BYTES_PER_EDGE)


@dataclass(frozen=True)
class Workload:
    """Registry entry: runnable body plus its result-size estimators."""

    name: str
    wire_id: int
    run: Callable[[bytes], bytes]
    result_size_for_payload: Callable[[bytes], int]
    result_size_for_size: Callable[[int], int]


REGISTRY: dict[str, Workload] = {
    workload.name: workload
    for workload in (
        Workload(
            name="sort",
            wire_id=1,
            run=run_sort,
            result_size_for_payload=len,
            result_size_for_size=int,
        ),
        Workload(
            name="pathfinder",
            wire_id=2,
            run=run_pathfinder,
            result_size_for_payload=_pathfinder_result_from_payload,
            result_size_for_size=_pathfinder_result_from_size,
        ),
        Workload(
            name="wordcount",
            wire_id=3,
            run=run_wordcount,
            result_size_for_payload=lambda payload: SMALL_RESULT_BYTES,
            result_size_for_size=lambda size: SMALL_RESULT_BYTES,
        ),
        Workload(
            name="facefinder",
            wire_id=4,
            run=run_facefinder,
            result_size_for_payload=lambda payload: SMALL_RESULT_BYTES,
            result_size_for_size=lambda size: SMALL_RESULT_BYTES,
        ),
    )
}

_BY_WIRE_ID = {workload.wire_id: workload for workload in REGISTRY.values()}


def by_wire_id(wire_id: int) -> Workload | None:
    return _BY_WIRE_ID.get(wire_id)


@dataclass(frozen=True)
class TaskSpec:
    """A task to decide about or execute.

    ``input_payload`` may be None for analytic use (the simulator and the
    one-shot decision command know only the size); execution requires it.
    """

    application: str
    input_payload: bytes | None
    input_size: int

    def __post_init__(self) -> None:
        if self.application not in REGISTRY:
            raise ValueError(f"unknown application {self.application!r}")
        if self.input_size < 0:
            raise ValueError(f"input_size must be >= 0, got {self.input_size}")
        if self.input_payload is not None and len(self.input_payload) != self.input_size:
            raise ValueError(
                f"input_size {self.input_size} does not match payload length "
                f"{len(self.input_payload)}"
            )

    @classmethod
    def from_payload(cls, application: str, payload: bytes) -> "TaskSpec":
        return cls(application=application, input_payload=bytes(payload), input_size=len(payload))

    @classmethod
    def sized(cls, application: str, input_size: int) -> "TaskSpec":
        return cls(application=application, input_payload=None, input_size=input_size)


def estimate_result_size(task: TaskSpec) -> int:
    """Expected download size for a task's result, from the registry table."""
    workload = REGISTRY[task.application]
    if task.input_payload is not None:
        return workload.result_size_for_payload(task.input_payload)
    return workload.result_size_for_size(task.input_size)
