"""Closed-form device-vs-cloud energy and time model.

Pure functions over SI units: seconds, watts, joules, bytes, bytes/second.
A remote execution splits into three phases on the device side -- upload,
idle wait, download -- and the summed phase energy is compared against the
cost of running the same task locally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

#: Relative tolerance for internal ledger consistency checks.
REL_TOL = 1e-9


def _check_finite(name: str, value: float) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValueError(f"{name} must be a number, got {value!r}") from None
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def _check_nonnegative(name: str, value: float) -> float:
    value = _check_finite(name, value)
    if value < 0:
        raise ValueError(f"{name} must be >= 0, got {value!r}")
    return value


def _check_positive(name: str, value: float) -> float:
    value = _check_finite(name, value)
    if value <= 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    return value


@dataclass(frozen=True)
class PowerProfile:
    """Device power draw in watts for the four modeled states.

    ``p_exec`` is active compute, ``p_idle`` is idle wait (radio and
    processor), ``p_send``/``p_receive`` are the transfer states.
    """

    p_exec: float
    p_idle: float
    p_send: float
    p_receive: float

    def __post_init__(self) -> None:
        for name in ("p_exec", "p_idle", "p_send", "p_receive"):
            _check_positive(name, getattr(self, name))
        if self.p_idle > self.p_exec:
            raise ValueError(
                f"p_idle ({self.p_idle}) cannot exceed p_exec ({self.p_exec})"
            )


@dataclass(frozen=True)
class ComputeSpec:
    """Computational demand of a task and the execution rates acting on it.

    The cloud rate is never stored separately; it is ``speedup * device_rate``
    so the two can never disagree.
    """

    complexity: float  # instructions
    device_rate: float  # instructions / second
    speedup: float  # cloud rate / device rate

    def __post_init__(self) -> None:
        _check_nonnegative("complexity", self.complexity)
        _check_positive("device_rate", self.device_rate)
        _check_finite("speedup", self.speedup)
        if self.speedup < 1:
            raise ValueError(f"speedup must be >= 1, got {self.speedup!r}")

    @property
    def cloud_rate(self) -> float:
        return self.speedup * self.device_rate

    def device_time(self) -> float:
        """Execution time on the device: complexity / device rate."""
        return self.complexity / self.device_rate


@dataclass(frozen=True)
class TransferSpec:
    """Payload sizes and link bandwidths for one offloaded task."""

    send_bytes: float
    receive_bytes: float
    send_bandwidth: float
    receive_bandwidth: float

    def __post_init__(self) -> None:
        _check_nonnegative("send_bytes", self.send_bytes)
        _check_nonnegative("receive_bytes", self.receive_bytes)
        _check_positive("send_bandwidth", self.send_bandwidth)
        _check_positive("receive_bandwidth", self.receive_bandwidth)


@dataclass(frozen=True)
class CloudEnergy:
    """Per-phase breakdown of the device energy spent on a remote execution."""

    e_send: float
    e_idle: float
    e_receive: float
    e_cloud: float
    t_send: float
    t_idle: float
    t_receive: float


@dataclass(frozen=True)
class EnergyLedger:
    """Complete energy/time account backing one local-vs-offload comparison."""

    e_local: float
    e_send: float
    e_idle: float
    e_receive: float
    e_cloud: float
    e_tradeoff: float
    e_prime: float
    e0_prime: float
    t_exec: float
    t_send: float
    t_idle: float
    t_receive: float

    def __post_init__(self) -> None:
        for name in ("t_exec", "t_send", "t_idle", "t_receive"):
            _check_nonnegative(name, getattr(self, name))
        phase_sum = self.e_send + self.e_idle + self.e_receive
        if not math.isclose(self.e_cloud, phase_sum, rel_tol=REL_TOL, abs_tol=1e-12):
            raise ValueError("e_cloud must equal e_send + e_idle + e_receive")
        if not math.isclose(
            self.e_tradeoff, self.e_local - self.e_cloud, rel_tol=REL_TOL, abs_tol=1e-12
        ):
            raise ValueError("e_tradeoff must equal e_local - e_cloud")

    @property
    def cloud_time(self) -> float:
        """Total wall time of the remote path: upload + wait + download."""
        return self.t_send + self.t_idle + self.t_receive


def local_energy(profile: PowerProfile, t_exec: float) -> float:
    """Energy to run on the device: active power times execution time."""
    t_exec = _check_nonnegative("t_exec", t_exec)
    return profile.p_exec * t_exec


def transfer_times(transfer: TransferSpec) -> tuple[float, float]:
    """Upload and download durations for the given payloads and bandwidths."""
    t_send = transfer.send_bytes / transfer.send_bandwidth
    t_receive = transfer.receive_bytes / transfer.receive_bandwidth
    return t_send, t_receive


def idle_time_max(t_exec: float, speedup: float) -> float:
    """Upper bound on the device's wait for the remote run: t_exec / speedup.

    This bound is what the rest of the model uses as the idle time.
    """
    t_exec = _check_nonnegative("t_exec", t_exec)
    speedup = _check_finite("speedup", speedup)
    if speedup < 1:
        raise ValueError(f"speedup must be >= 1, got {speedup!r}")
    return t_exec / speedup


def cloud_energy(
    profile: PowerProfile, transfer: TransferSpec, t_idle: float
) -> CloudEnergy:
    """Device energy of the three remote phases and their sum."""
    t_idle = _check_nonnegative("t_idle", t_idle)
    t_send, t_receive = transfer_times(transfer)
    e_send = profile.p_send * t_send
    e_idle = profile.p_idle * t_idle
    e_receive = profile.p_receive * t_receive
    return CloudEnergy(
        e_send=e_send,
        e_idle=e_idle,
        e_receive=e_receive,
        e_cloud=e_send + e_idle + e_receive,
        t_send=t_send,
        t_idle=t_idle,
        t_receive=t_receive,
    )


def breakeven_pair(
    profile: PowerProfile, t_exec: float, t_idle: float, transfer: TransferSpec
) -> tuple[float, float]:
    """The break-even transmission energy and the actual transmission energy.

    Offloading saves energy exactly when the second value falls below the
    first; their difference equals the local-minus-cloud trade-off.
    """
    t_exec = _check_nonnegative("t_exec", t_exec)
    t_idle = _check_nonnegative("t_idle", t_idle)
    e0_prime = profile.p_exec * t_exec - profile.p_idle * t_idle
    t_send, t_receive = transfer_times(transfer)
    e_prime = profile.p_send * t_send + profile.p_receive * t_receive
    return e0_prime, e_prime


def energy_ledger(
    profile: PowerProfile, transfer: TransferSpec, t_exec: float, speedup: float
) -> EnergyLedger:
    """Assemble the full ledger for one comparison, using the maximal idle time."""
    t_exec = _check_nonnegative("t_exec", t_exec)
    t_idle = idle_time_max(t_exec, speedup)
    e_local = local_energy(profile, t_exec)
    cloud = cloud_energy(profile, transfer, t_idle)
    e0_prime, e_prime = breakeven_pair(profile, t_exec, t_idle, transfer)
    return EnergyLedger(
        e_local=e_local,
        e_send=cloud.e_send,
        e_idle=cloud.e_idle,
        e_receive=cloud.e_receive,
        e_cloud=cloud.e_cloud,
        e_tradeoff=e_local - cloud.e_cloud,
        e_prime=e_prime,
        e0_prime=e0_prime,
        t_exec=t_exec,
        t_send=cloud.t_send,
        t_idle=t_idle,
        t_receive=cloud.t_receive,
    )
