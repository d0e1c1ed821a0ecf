"""offloadkit: energy-aware computation offloading.

A per-task decision engine that weighs running on a constrained device
against shipping the work to a server, an analytic sweep simulator over the
four factors that move that decision, and a client/server runtime that can
actually execute the tasks either way.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .engine import Decision, DecisionReason, DecisionRequest, Verdict, decide, evaluate
from .errors import (
    ConfigError,
    FrameError,
    HistoryCorruptError,
    InsufficientHistoryError,
    NegativeCycleError,
    NoBreakevenError,
    OffloadError,
    RemoteExecutionError,
    TransportError,
    TruncatedFrameError,
    WorkloadError,
)
from .history import HistoryLog, HistoryRecord, MemoryHistory
from .model import (
    CloudEnergy,
    ComputeSpec,
    EnergyLedger,
    PowerProfile,
    TransferSpec,
    breakeven_pair,
    cloud_energy,
    energy_ledger,
    idle_time_max,
    local_energy,
    transfer_times,
)
from .predictors import (
    EmaState,
    EnvironmentSample,
    Monitor,
    TimeQuery,
    ema_init,
    ema_new,
    ema_update,
    predict_execution_time,
    smoothing_coefficient,
)
from .runtime import ExecutionSite, OffloadServer, TaskResult, run_local, run_remote, serve
from .simulator import (
    CostModel,
    SweepConfig,
    SweepDefaults,
    SweepFactor,
    SweepMode,
    SweepRow,
    default_cost_model,
    find_breakeven,
    run_sweep,
    rows_to_csv,
)
from .workloads import TaskSpec, estimate_result_size

__all__ = [
    "__version__",
    "CloudEnergy",
    "ComputeSpec",
    "ConfigError",
    "CostModel",
    "Decision",
    "DecisionReason",
    "DecisionRequest",
    "EmaState",
    "EnergyLedger",
    "EnvironmentSample",
    "ExecutionSite",
    "FrameError",
    "HistoryCorruptError",
    "HistoryLog",
    "HistoryRecord",
    "InsufficientHistoryError",
    "MemoryHistory",
    "Monitor",
    "NegativeCycleError",
    "NoBreakevenError",
    "OffloadError",
    "OffloadServer",
    "PowerProfile",
    "RemoteExecutionError",
    "SweepConfig",
    "SweepDefaults",
    "SweepFactor",
    "SweepMode",
    "SweepRow",
    "TaskResult",
    "TaskSpec",
    "TimeQuery",
    "TransferSpec",
    "TransportError",
    "TruncatedFrameError",
    "Verdict",
    "WorkloadError",
    "breakeven_pair",
    "cloud_energy",
    "decide",
    "default_cost_model",
    "ema_init",
    "ema_new",
    "ema_update",
    "energy_ledger",
    "estimate_result_size",
    "evaluate",
    "find_breakeven",
    "idle_time_max",
    "local_energy",
    "predict_execution_time",
    "rows_to_csv",
    "run_local",
    "run_remote",
    "run_sweep",
    "serve",
    "smoothing_coefficient",
    "transfer_times",
]
