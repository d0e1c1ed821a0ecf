"""Flat key = value configuration files.

Lines are ``key = value``; blank lines and ``#`` comments are ignored. The
sweep keys mirror SweepConfig; a handful of shared keys (power profile,
speedup ratio, history log path) also serve the decide/run commands.
"""
from __future__ import annotations

import math
import os
from pathlib import Path

from .errors import ConfigError
from .model import PowerProfile
from .simulator import (
    APPLICATION_DEFAULTS,
    DEFAULT_OVERHEAD_ENERGY,
    DEFAULT_OVERHEAD_TIME,
    DEFAULT_PROFILE,
    DEFAULT_SPEEDUP,
    SweepConfig,
    SweepDefaults,
    SweepFactor,
)

_SWEEP_KEYS = {
    "application",
    "factor",
    "lo",
    "hi",
    "steps",
    "default_input_size",
    "default_cpu_workload",
    "default_bandwidth",
    "default_delay_tolerance_ms",
    "overhead_energy_j",
    "overhead_time_s",
}
_SHARED_KEYS = {
    "p_exec",
    "p_idle",
    "p_send",
    "p_receive",
    "speedup_n",
    "history_log",
}
KNOWN_KEYS = _SWEEP_KEYS | _SHARED_KEYS

_INFINITE = {"inf", "infinite", "infinity"}


def parse_kv(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for number, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, separator, value = line.partition("=")
        if not separator:
            raise ConfigError(f"{source}: line {number}: expected 'key = value', got {raw!r}")
        key = key.strip()
        value = value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}: line {number}: unknown config key: {key}")
        if key in values:
            raise ConfigError(f"{source}: line {number}: duplicate config key: {key}")
        values[key] = value
    return values


def load_kv(path: str | os.PathLike) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_kv(text, source=str(path))


def _number(values: dict[str, str], key: str, source: str) -> float:
    try:
        return float(values[key])
    except ValueError:
        raise ConfigError(f"{source}: config key {key} must be a number, got {values[key]!r}") from None


def _delay_ms(text: str, key: str, source: str) -> float:
    if text.lower() in _INFINITE:
        return math.inf
    try:
        milliseconds = float(text)
    except ValueError:
        raise ConfigError(
            f"{source}: config key {key} must be milliseconds or 'infinite', got {text!r}"
        ) from None
    return milliseconds / 1000.0


def profile_from(values: dict[str, str], source: str = "<config>") -> PowerProfile:
    """Power profile from the p_* keys, defaulting field-wise."""
    fields = {}
    for name, default in (
        ("p_exec", DEFAULT_PROFILE.p_exec),
        ("p_idle", DEFAULT_PROFILE.p_idle),
        ("p_send", DEFAULT_PROFILE.p_send),
        ("p_receive", DEFAULT_PROFILE.p_receive),
    ):
        fields[name] = _number(values, name, source) if name in values else default
    try:
        return PowerProfile(**fields)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def speedup_from(values: dict[str, str], source: str = "<config>") -> float:
    if "speedup_n" not in values:
        return DEFAULT_SPEEDUP
    return _number(values, "speedup_n", source)


def load_sweep_config(path: str | os.PathLike) -> SweepConfig:
    source = str(path)
    values = load_kv(path)
    for key in ("application", "factor", "lo", "hi", "steps"):
        if key not in values:
            raise ConfigError(f"{source}: missing config key: {key}")
    application = values["application"]
    if application not in APPLICATION_DEFAULTS:
        raise ConfigError(f"{source}: unknown application {application!r}")
    try:
        factor = SweepFactor(values["factor"])
    except ValueError:
        choices = ", ".join(f.value for f in SweepFactor)
        raise ConfigError(
            f"{source}: factor must be one of {choices}, got {values['factor']!r}"
        ) from None

    base = APPLICATION_DEFAULTS[application]
    defaults = SweepDefaults(
        input_size=(
            int(_number(values, "default_input_size", source))
            if "default_input_size" in values
            else base.input_size
        ),
        cpu_workload=(
            _number(values, "default_cpu_workload", source)
            if "default_cpu_workload" in values
            else base.cpu_workload
        ),
        bandwidth=(
            _number(values, "default_bandwidth", source)
            if "default_bandwidth" in values
            else base.bandwidth
        ),
        delay_tolerance=(
            _delay_ms(values["default_delay_tolerance_ms"], "default_delay_tolerance_ms", source)
            if "default_delay_tolerance_ms" in values
            else base.delay_tolerance
        ),
    )
    try:
        steps = int(values["steps"])
    except ValueError:
        raise ConfigError(f"{source}: config key steps must be an integer") from None
    try:
        return SweepConfig(
            application=application,
            factor=factor,
            lo=_number(values, "lo", source),
            hi=_number(values, "hi", source),
            steps=steps,
            defaults=defaults,
            profile=profile_from(values, source),
            speedup=speedup_from(values, source),
            overhead_energy=(
                _number(values, "overhead_energy_j", source)
                if "overhead_energy_j" in values
                else DEFAULT_OVERHEAD_ENERGY
            ),
            overhead_time=(
                _number(values, "overhead_time_s", source)
                if "overhead_time_s" in values
                else DEFAULT_OVERHEAD_TIME
            ),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
