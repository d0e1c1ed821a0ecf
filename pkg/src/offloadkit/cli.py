"""Command-line front end: simulate, decide, serve, run, log seed, log show."""
from __future__ import annotations

import argparse
import math
import sys
import time
from pathlib import Path

from . import __version__
from .config import load_kv, profile_from, speedup_from
from .engine import DecisionRequest, decide, evaluate
from .errors import OffloadError
from .history import HistoryLog
from .predictors import Monitor, cpu_probe, ema_init, fixed_monitor, loopback_bandwidth_probe
from .runtime import DEFAULT_TIMEOUT, dispatch, serve
from .simulator import rows_to_csv, run_sweep
from .config import load_sweep_config
from .protocol import DEFAULT_MAX_PAYLOAD
from .workloads import REGISTRY, TaskSpec

_LEDGER_FIELDS = (
    "e_local",
    "e_send",
    "e_idle",
    "e_receive",
    "e_cloud",
    "e_tradeoff",
    "e_prime",
    "e0_prime",
    "t_exec",
    "t_send",
    "t_idle",
    "t_receive",
)


def _fmt(value: float) -> str:
    return format(value, ".9g")


def _parse_delay(text: str) -> float:
    if text.lower() in ("inf", "infinite", "infinity"):
        return math.inf
    return float(text)


def _decision_record(decision) -> str:
    parts = [f"verdict={decision.verdict.value}", f"reason={decision.reason.value}"]
    if decision.predicted_t_exec is not None:
        parts.append(f"predicted_t_exec={_fmt(decision.predicted_t_exec)}")
    if decision.predicted_bandwidth is not None:
        parts.append(f"predicted_bandwidth={_fmt(decision.predicted_bandwidth)}")
    if decision.predicted_cpu is not None:
        parts.append(f"predicted_cpu={_fmt(decision.predicted_cpu)}")
    if decision.ledger is not None:
        for name in _LEDGER_FIELDS:
            parts.append(f"{name}={_fmt(getattr(decision.ledger, name))}")
        parts.append(f"cloud_time={_fmt(decision.ledger.cloud_time)}")
    return " ".join(parts)


def _config_values(args) -> dict[str, str]:
    if getattr(args, "config", None):
        return load_kv(args.config)
    return {}


def _profile_from_args(args, values) -> "PowerProfile":
    from .model import PowerProfile

    base = profile_from(values)
    return PowerProfile(
        p_exec=args.p_exec if args.p_exec is not None else base.p_exec,
        p_idle=args.p_idle if args.p_idle is not None else base.p_idle,
        p_send=args.p_send if args.p_send is not None else base.p_send,
        p_receive=args.p_receive if args.p_receive is not None else base.p_receive,
    )


def _history_path(args, values) -> Path:
    if getattr(args, "history", None):
        return Path(args.history)
    if "history_log" in values:
        return Path(values["history_log"])
    return Path("history.log")


def _write_output(payload: bytes, out: str) -> None:
    if out == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    else:
        Path(out).write_bytes(payload)


def _cmd_simulate(args) -> int:
    config = load_sweep_config(args.config)
    csv_text = rows_to_csv(run_sweep(config))
    if args.out == "-":
        sys.stdout.write(csv_text)
    else:
        Path(args.out).write_text(csv_text, encoding="utf-8")
    return 0


def _cmd_decide(args) -> int:
    values = _config_values(args)
    profile = _profile_from_args(args, values)
    speedup = args.n if args.n is not None else speedup_from(values)
    task = TaskSpec.sized(args.app, args.input_size)
    request = DecisionRequest(
        task=task,
        power_profile=profile,
        speedup=speedup,
        delay_tolerance=_parse_delay(args.delay_tolerance),
        d_receive=args.d_receive,
    )
    if args.t_exec is not None:
        if args.bandwidth is None:
            raise OffloadError("--bandwidth is required")
        decision = evaluate(request, args.t_exec, bandwidth=args.bandwidth, predicted_cpu=args.cpu)
    else:
        if args.history is None:
            raise OffloadError("either --t-exec or --history is required")
        if args.cpu is None or args.bandwidth is None:
            raise OffloadError("--cpu and --bandwidth are required with --history")
        decision = decide(
            request,
            cpu_state=ema_init(args.cpu),
            bandwidth_state=ema_init(args.bandwidth),
            history=HistoryLog(args.history),
            history_fallback=args.fallback,
        )
    print(_decision_record(decision))
    return 0


def _cmd_serve(args) -> int:
    print(f"serving on {args.bind}", file=sys.stderr)
    try:
        serve(args.bind, max_payload=args.max_payload)
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_run(args) -> int:
    values = _config_values(args)
    payload = Path(args.input).read_bytes()
    task = TaskSpec.from_payload(args.app, payload)
    history = HistoryLog(_history_path(args, values))

    if args.cpu is not None:
        cpu_monitor = fixed_monitor(args.cpu)
    else:
        cpu_monitor = Monitor(cpu_probe())
        cpu_monitor.sample()
        time.sleep(0.05)
        cpu_monitor.sample()

    decision = None
    if args.force == "local":
        to_remote = False
    elif args.force == "remote":
        if args.remote is None:
            raise OffloadError("--force remote requires --remote")
        to_remote = True
    else:
        profile = _profile_from_args(args, values)
        speedup = args.n if args.n is not None else speedup_from(values)
        if args.bandwidth is not None:
            bandwidth_monitor = fixed_monitor(args.bandwidth)
        else:
            bandwidth_monitor = Monitor(loopback_bandwidth_probe())
            bandwidth_monitor.sample()
        request = DecisionRequest(
            task=task,
            power_profile=profile,
            speedup=speedup,
            delay_tolerance=_parse_delay(args.delay_tolerance),
            d_receive=args.d_receive,
        )
        decision = decide(
            request,
            cpu_state=cpu_monitor.state,
            bandwidth_state=bandwidth_monitor.state,
            history=history,
            history_fallback=args.fallback,
        )
        print(_decision_record(decision), file=sys.stderr)
        to_remote = decision.verdict.value == "offload"

    result = dispatch(
        task,
        to_remote,
        cpu_monitor=cpu_monitor,
        history=history,
        remote=args.remote,
        fallback_local=args.fallback_local,
        timeout=args.timeout,
        slowdown=args.local_slowdown,
    )
    print(
        f"executed={result.executed_at.value} wall_time={_fmt(result.wall_time)}",
        file=sys.stderr,
    )
    _write_output(result.output_payload, args.out)
    return 0


def _cmd_log_seed(args) -> int:
    count = HistoryLog(args.history).seed_from(getattr(args, "from"))
    print(f"seeded {count} records into {args.history}", file=sys.stderr)
    return 0


def _cmd_log_show(args) -> int:
    from .history import format_record

    for record in HistoryLog(args.history).snapshot(args.app):
        sys.stdout.write(format_record(record))
    return 0


def _add_profile_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--p-exec", type=float, default=None, help="active compute power, watts")
    parser.add_argument("--p-idle", type=float, default=None, help="idle power, watts")
    parser.add_argument("--p-send", type=float, default=None, help="upload power, watts")
    parser.add_argument("--p-receive", type=float, default=None, help="download power, watts")
    parser.add_argument("--n", type=float, default=None, help="remote/device execution rate ratio")
    parser.add_argument("--config", default=None, help="key=value config file with defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="offloadkit",
        description="Energy-aware computation offloading: simulate, decide, and execute.",
    )
    parser.add_argument("--version", action="version", version=f"offloadkit {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="run a factor sweep and emit CSV")
    simulate.add_argument("--config", required=True, help="sweep config file")
    simulate.add_argument("--out", default="-", help="CSV path, or - for stdout")
    simulate.set_defaults(func=_cmd_simulate)

    decide_cmd = commands.add_parser("decide", help="one-shot decision from flags")
    decide_cmd.add_argument("--app", required=True, choices=sorted(REGISTRY))
    decide_cmd.add_argument("--input-size", required=True, type=int, help="bytes to upload")
    decide_cmd.add_argument("--d-receive", type=int, default=None, help="result bytes to download")
    decide_cmd.add_argument("--t-exec", type=float, default=None, help="predicted local seconds (skips history)")
    decide_cmd.add_argument("--history", default=None, help="history log to predict from")
    decide_cmd.add_argument("--cpu", type=float, default=None, help="predicted CPU workload percent")
    decide_cmd.add_argument("--bandwidth", type=float, default=None, help="predicted bandwidth, bytes/s")
    decide_cmd.add_argument("--delay-tolerance", default="inf", help="seconds, or inf")
    decide_cmd.add_argument("--fallback", choices=("local", "error"), default="local")
    _add_profile_flags(decide_cmd)
    decide_cmd.set_defaults(func=_cmd_decide)

    serve_cmd = commands.add_parser("serve", help="run the remote execution manager")
    serve_cmd.add_argument("--bind", default="127.0.0.1:7070", help="host:port to listen on")
    serve_cmd.add_argument("--max-payload", type=int, default=DEFAULT_MAX_PAYLOAD)
    serve_cmd.set_defaults(func=_cmd_serve)

    run_cmd = commands.add_parser("run", help="execute a task locally or remotely")
    run_cmd.add_argument("--app", required=True, choices=sorted(REGISTRY))
    run_cmd.add_argument("--input", required=True, help="input payload file")
    run_cmd.add_argument("--remote", default=None, help="host:port of the remote manager")
    run_cmd.add_argument("--delay-tolerance", default=None, help="seconds, or inf")
    run_cmd.add_argument("--force", choices=("local", "remote"), default=None)
    run_cmd.add_argument("--fallback-local", action="store_true", help="run locally if the remote call fails")
    run_cmd.add_argument("--fallback", choices=("local", "error"), default="local")
    run_cmd.add_argument("--history", default=None, help="history log path (default history.log)")
    run_cmd.add_argument("--cpu", type=float, default=None, help="override the CPU monitor, percent")
    run_cmd.add_argument("--bandwidth", type=float, default=None, help="override the bandwidth monitor, bytes/s")
    run_cmd.add_argument("--d-receive", type=int, default=None)
    run_cmd.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT)
    run_cmd.add_argument("--local-slowdown", type=float, default=1.0,
                         help="stretch local runs by this factor (emulates a slower device)")
    run_cmd.add_argument("--out", default="-", help="result path, or - for stdout")
    _add_profile_flags(run_cmd)
    run_cmd.set_defaults(func=_cmd_run)

    log_cmd = commands.add_parser("log", help="history log utilities")
    log_sub = log_cmd.add_subparsers(dest="log_command", required=True)
    seed = log_sub.add_parser("seed", help="ingest a pre-generated log file")
    seed.add_argument("--history", default="history.log")
    seed.add_argument("--from", required=True, help="log file to ingest")
    seed.set_defaults(func=_cmd_log_seed)
    show = log_sub.add_parser("show", help="print records")
    show.add_argument("--history", default="history.log")
    show.add_argument("--app", default=None, help="only this application")
    show.set_defaults(func=_cmd_log_show)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    if getattr(args, "command", None) == "run":
        if args.force is not None and args.delay_tolerance is not None:
            parser.print_usage(sys.stderr)
            print("offloadkit run: --force conflicts with --delay-tolerance", file=sys.stderr)
            return 2
        if args.delay_tolerance is None:
            args.delay_tolerance = "inf"
    try:
        return args.func(args)
    except OffloadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main_entry() -> None:
    raise SystemExit(main())
