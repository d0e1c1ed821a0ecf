"""The offloading decision.

Five steps: predict the local execution time from history, gate on the
user's delay tolerance, then compare device energy against the three-phase
remote energy. Ties go to local execution so an indifferent decision never
takes on network exposure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import InsufficientHistoryError
from .model import EnergyLedger, PowerProfile, TransferSpec, energy_ledger
from .predictors import EmaState, TimeQuery, predict_execution_time
from .workloads import TaskSpec, estimate_result_size


class Verdict(str, Enum):
    LOCAL = "local"
    OFFLOAD = "offload"


class DecisionReason(str, Enum):
    DELAY_OVERRIDE = "delay_override"
    ENERGY_COMPARISON = "energy_comparison"
    INSUFFICIENT_HISTORY = "insufficient_history"


_FALLBACKS = ("local", "error")


@dataclass(frozen=True)
class DecisionRequest:
    """Everything the engine needs to judge one task."""

    task: TaskSpec
    power_profile: PowerProfile
    speedup: float
    delay_tolerance: float = math.inf  # seconds
    d_receive: int | None = None  # None -> registry estimate
    send_bandwidth: float | None = None  # None -> predicted bandwidth
    receive_bandwidth: float | None = None

    def __post_init__(self) -> None:
        if self.speedup < 1 or not math.isfinite(self.speedup):
            raise ValueError(f"speedup must be a finite ratio >= 1, got {self.speedup!r}")
        if not self.delay_tolerance > 0:
            raise ValueError(
                f"delay_tolerance must be > 0 (or infinite), got {self.delay_tolerance!r}"
            )
        if self.d_receive is not None and self.d_receive < 0:
            raise ValueError(f"d_receive must be >= 0, got {self.d_receive!r}")
        for name in ("send_bandwidth", "receive_bandwidth"):
            value = getattr(self, name)
            if value is not None and not value > 0:
                raise ValueError(f"{name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class Decision:
    """The verdict plus the full account that justified it."""

    verdict: Verdict
    reason: DecisionReason
    ledger: EnergyLedger | None
    predicted_t_exec: float | None
    predicted_bandwidth: float | None
    predicted_cpu: float | None

    def __post_init__(self) -> None:
        if self.reason is DecisionReason.DELAY_OVERRIDE and self.verdict is not Verdict.OFFLOAD:
            raise ValueError("a delay override always offloads")
        if self.reason is not DecisionReason.INSUFFICIENT_HISTORY and self.ledger is None:
            raise ValueError("ledger required unless history was insufficient")


def evaluate(
    request: DecisionRequest,
    t_exec: float,
    bandwidth: float | None = None,
    predicted_cpu: float | None = None,
) -> Decision:
    """Judge a task given an already-known execution-time prediction.

    ``bandwidth`` is the monitored value used for both link directions
    unless the request overrides them individually.
    """
    send_bandwidth = request.send_bandwidth if request.send_bandwidth is not None else bandwidth
    receive_bandwidth = (
        request.receive_bandwidth if request.receive_bandwidth is not None else bandwidth
    )
    if send_bandwidth is None or receive_bandwidth is None:
        raise ValueError("bandwidth required when the request does not override both directions")
    if not math.isfinite(t_exec) or t_exec < 0:
        raise ValueError(f"t_exec must be finite and >= 0, got {t_exec!r}")

    d_receive = request.d_receive
    if d_receive is None:
        d_receive = estimate_result_size(request.task)
    transfer = TransferSpec(
        send_bytes=request.task.input_size,
        receive_bytes=d_receive,
        send_bandwidth=send_bandwidth,
        receive_bandwidth=receive_bandwidth,
    )
    ledger = energy_ledger(request.power_profile, transfer, t_exec, request.speedup)

    if request.delay_tolerance < t_exec:
        verdict, reason = Verdict.OFFLOAD, DecisionReason.DELAY_OVERRIDE
    elif ledger.e_cloud < ledger.e_local:
        verdict, reason = Verdict.OFFLOAD, DecisionReason.ENERGY_COMPARISON
    else:
        verdict, reason = Verdict.LOCAL, DecisionReason.ENERGY_COMPARISON
    return Decision(
        verdict=verdict,
        reason=reason,
        ledger=ledger,
        predicted_t_exec=t_exec,
        predicted_bandwidth=bandwidth,
        predicted_cpu=predicted_cpu,
    )


def decide(
    request: DecisionRequest,
    cpu_state: EmaState,
    bandwidth_state: EmaState,
    history,
    *,
    history_fallback: str = "local",
) -> Decision:
    """The full pipeline over snapshots of the predictors and the history log.

    ``history_fallback`` controls what happens when the log holds fewer than
    two records for the application: ``"local"`` (default) answers Local with
    the insufficient-history reason so the run can grow the log, ``"error"``
    re-raises.
    """
    if history_fallback not in _FALLBACKS:
        raise ValueError(f"history_fallback must be one of {_FALLBACKS}")
    if not cpu_state.initialized or not bandwidth_state.initialized:
        raise ValueError("both predictors need at least one observed sample")
    predicted_cpu = cpu_state.current
    predicted_bandwidth = bandwidth_state.current

    records = history.snapshot(request.task.application)
    query = TimeQuery(
        application=request.task.application,
        input_size=request.task.input_size,
        avg_cpu_workload=predicted_cpu,
    )
    try:
        t_exec = predict_execution_time(records, query)
    except InsufficientHistoryError:
        if history_fallback == "error":
            raise
        return Decision(
            verdict=Verdict.LOCAL,
            reason=DecisionReason.INSUFFICIENT_HISTORY,
            ledger=None,
            predicted_t_exec=None,
            predicted_bandwidth=predicted_bandwidth,
            predicted_cpu=predicted_cpu,
        )
    return evaluate(request, t_exec, bandwidth=predicted_bandwidth, predicted_cpu=predicted_cpu)
