"""Config files, CSV output and the ``vrnet`` command line.

Config files are UTF-8 ``key = value`` lines; ``#`` starts a comment. Units
are part of every key name so nothing like "1GB" can be misread::

    cable_m = 250
    data_rate_bps = 2.5e9

Usage::

    vrnet eval [--config PATH | --set key=value ...]
    vrnet sweep --param {cable_m|data_rate_bps|ppr} --from X --to Y --steps N --out PATH [--config PATH]
    vrnet sim [--config PATH] [--mode stop_and_wait|pipelined] [--duration S]

Exit status is 0 on success, 1 on usage errors and 2 when a configuration
or model constraint is violated.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import os
import sys
from pathlib import Path
from typing import IO, NamedTuple, Sequence

import numpy as np

from .model import HeaderStack, InvalidParameter, LinkParams, VRWorkload, evaluate
from .sim import Mode, control_overhead, run_session, validate_against_model
from .sweep import SweepSeries, SweepSpec, baseline_config, sweep

ENV_CONFIG = "VRNET_CONFIG"

# key -> (dataclass name, field, is integer byte count)
CONFIG_KEYS = {
    "mtu": ("headers", "mtu", True),
    "eth_header": ("headers", "eth_header", True),
    "ip_header": ("headers", "ip_header", True),
    "udp_header": ("headers", "udp_header", True),
    "vr_header": ("headers", "vr_header", True),
    "vr_frame_bytes": ("workload", "vr_frame_size", True),
    "fps": ("workload", "fps", False),
    "data_packet_bytes": ("link", "data_packet_len", True),
    "ack_packet_bytes": ("link", "ack_packet_len", True),
    "cable_m": ("link", "cable_length", False),
    "prop_mps": ("link", "propagation_speed", False),
    "switch_delay_s": ("link", "switch_delay", False),
    "ppr": ("link", "ppr", False),
    "data_rate_bps": ("link", "data_rate", False),
    "health_check_s": ("workload", "health_check_period", False),
    "mode": (None, "mode", False),
    "duration_s": (None, "duration", False),
}
_KEY_FOR_FIELD = {(owner, name): key for key, (owner, name, _) in CONFIG_KEYS.items()}
_OWNER_FOR_CLASS = {"HeaderStack": "headers", "LinkParams": "link", "VRWorkload": "workload"}

DEFAULT_MODE = Mode.STOP_AND_WAIT
DEFAULT_DURATION = 1.0

CSV_COLUMNS = (
    "param_name", "param_value", "total_latency_us", "throughput_gbps",
    "utilization", "frames_per_vr_frame",
)


class ConfigError(ValueError):
    """``line`` is a 1-based line number, or a label such as ``"--set"``."""

    def __init__(self, message: str, *, line: int | str | None = None, key: str | None = None):
        self.line = line
        self.key = key
        if line is None:
            where = ""
        elif isinstance(line, int):
            where = f"line {line}: "
        else:
            where = f"{line}: "
        super().__init__(where + message)


class Config(NamedTuple):
    headers: HeaderStack
    link: LinkParams
    workload: VRWorkload
    mode: Mode = DEFAULT_MODE
    duration: float = DEFAULT_DURATION


def default_config() -> Config:
    return Config(*baseline_config())


def _parse_number(text: str, integer: bool) -> int | float:
    value = float(text)
    if integer:
        if not value.is_integer():
            raise ValueError(f"{text!r} is not a whole number of bytes")
        return int(value)
    return value


def _parse_value(key: str, raw: str):
    if key == "mode":
        return Mode(raw)
    return _parse_number(raw, CONFIG_KEYS[key][2])


def build_config(values: dict, lines: dict | None = None) -> Config:
    """Apply ``key -> parsed value`` overrides to the baseline and validate."""
    lines = lines or {}
    base = default_config()
    groups = {"headers": {}, "link": {}, "workload": {}}
    mode, duration = base.mode, base.duration
    for key, value in values.items():
        owner, name, _ = CONFIG_KEYS[key]
        if owner is None:
            if key == "mode":
                mode = value
            else:
                duration = value
        else:
            groups[owner][name] = value
    try:
        headers = dataclasses.replace(base.headers, **groups["headers"])
        link = dataclasses.replace(base.link, **groups["link"])
        workload = dataclasses.replace(base.workload, **groups["workload"])
        evaluate(headers, link, workload)
    except InvalidParameter as exc:
        owner = _OWNER_FOR_CLASS.get(exc.owner)
        key = _KEY_FOR_FIELD.get((owner, exc.field), exc.field)
        raise ConfigError(f"{key}: {exc}", line=lines.get(key), key=key) from exc
    if not duration > 0 or duration == float("inf"):
        raise ConfigError(f"duration_s must be finite and > 0, got {duration}",
                          line=lines.get("duration_s"), key="duration_s")
    return Config(headers, link, workload, mode, duration)


def _parse_lines(text: str, source: str | None = None) -> tuple[dict, dict]:
    values: dict = {}
    lines: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        where = source or lineno
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep or not key or not raw:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=where)
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}", line=where, key=key)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line=where, key=key)
        try:
            values[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}", line=where, key=key) from None
        lines[key] = where
    return values, lines


def parse_config(text: str) -> Config:
    return build_config(*_parse_lines(text))


def load_config(path: str | os.PathLike) -> Config:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def render_config(config: Config) -> str:
    """Inverse of :func:`parse_config`: every key, full float precision."""
    objs = {"headers": config.headers, "link": config.link, "workload": config.workload}
    out = []
    for key, (owner, name, _) in CONFIG_KEYS.items():
        if owner is None:
            value = config.mode.value if key == "mode" else repr(float(config.duration))
        else:
            value = repr(getattr(objs[owner], name))
        out.append(f"{key} = {value}")
    return "\n".join(out) + "\n"


# -- CSV ----------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return np.format_float_positional(float(x), unique=True, trim="-")


def _param_key(field_name: str) -> str:
    return _KEY_FOR_FIELD.get(("link", field_name), field_name)


def write_csv(series: SweepSeries, destination: str | os.PathLike | IO[str]) -> None:
    """Write one row per sweep point; ``destination`` is a path or open text file."""
    if hasattr(destination, "write"):
        _write_rows(series, destination)
        return
    with open(destination, "w", encoding="utf-8", newline="") as fh:
        _write_rows(series, fh)


def _write_rows(series: SweepSeries, fh: IO[str]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    name = _param_key(series.parameter)
    for value, m in series.points:
        writer.writerow([
            name,
            _fmt(value),
            _fmt(m.total_latency * 1e6),
            _fmt(m.throughput / 1e9),
            _fmt(m.utilization),
            _fmt(m.frames_per_vr_frame),
        ])


def read_csv(source: str | os.PathLike | IO[str]) -> list[dict]:
    if hasattr(source, "read"):
        rows = list(csv.DictReader(source))
    else:
        with open(source, encoding="utf-8", newline="") as fh:
            rows = list(csv.DictReader(fh))
    for row in rows:
        for col in CSV_COLUMNS[1:]:
            row[col] = float(row[col])
        row["frames_per_vr_frame"] = int(row["frames_per_vr_frame"])
    return rows


# -- command line -------------------------------------------------------------

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vrnet", description="VR-over-UDP/Ethernet performance model")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def config_opts(p):
        p.add_argument("--config", metavar="PATH",
                       help=f"key = value config file ('baseline' for defaults; default ${ENV_CONFIG})")
        p.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                       help="override one config key (repeatable)")

    p_eval = sub.add_parser("eval", help="print closed-form metrics")
    config_opts(p_eval)

    p_sweep = sub.add_parser("sweep", help="sweep one parameter and write a CSV")
    p_sweep.add_argument("--param", required=True, choices=("cable_m", "data_rate_bps", "ppr"))
    p_sweep.add_argument("--from", dest="start", type=float, required=True)
    p_sweep.add_argument("--to", dest="stop", type=float, required=True)
    p_sweep.add_argument("--steps", type=int, required=True)
    p_sweep.add_argument("--out", required=True, metavar="PATH")
    config_opts(p_sweep)

    p_sim = sub.add_parser("sim", help="simulate one session")
    p_sim.add_argument("--mode", choices=[m.value for m in Mode])
    p_sim.add_argument("--duration", type=float, metavar="S")
    config_opts(p_sim)
    return parser


def _resolve_config(args) -> Config:
    path = args.config if args.config is not None else os.environ.get(ENV_CONFIG)
    text = "" if path in (None, "", "baseline") else Path(path).read_text(encoding="utf-8")
    values, lines = _parse_lines(text)
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        override, where = _parse_lines(item, source="--set")
        values.update(override)
        lines.update(where)
    return build_config(values, lines)


def _print_metrics(cfg: Config, out) -> None:
    m = evaluate(cfg.headers, cfg.link, cfg.workload)
    rows = [
        ("max payload", f"{m.max_payload} B"),
        ("data network delay", f"{m.data_network_delay * 1e6:.3f} us"),
        ("ethernet data latency", f"{m.eth_data_latency * 1e6:.3f} us"),
        ("ack latency", f"{m.ack_latency * 1e6:.3f} us"),
        ("total latency", f"{m.total_latency * 1e6:.3f} us"),
        ("throughput", f"{m.throughput / 1e9:.4f} Gbps"),
        ("frames per VR frame", f"{m.frames_per_vr_frame}"),
        ("utilization", f"{m.utilization:.4f}" + ("  (OVERLOADED)" if m.overloaded else "")),
    ]
    width = max(len(k) for k, _ in rows)
    for k, v in rows:
        print(f"{k:<{width}}  {v}", file=out)


def _run_sim(cfg: Config, args, out) -> None:
    mode = Mode(args.mode) if args.mode else cfg.mode
    duration = args.duration if args.duration is not None else cfg.duration
    stats = run_session(cfg.headers, cfg.link, cfg.workload, mode, duration)
    print(f"mode                {stats.mode.value}", file=out)
    print(f"streaming duration  {stats.streaming_duration:g} s", file=out)
    print(f"session duration    {stats.session_duration:.6f} s", file=out)
    print(f"VR frames           {stats.vr_frames_completed}/{stats.vr_frames_generated} "
          f"({stats.achieved_fps:g} fps)", file=out)
    for kind, n in stats.message_counts.items():
        if n:
            print(f"  {kind.value:<18}{n}", file=out)
    if stats.rtt_samples:
        rtt = np.asarray(stats.rtt_samples) * 1e6
        print(f"round trip (us)     min {rtt.min():.3f}  mean {rtt.mean():.3f}  max {rtt.max():.3f}",
              file=out)
    print(f"goodput             {stats.goodput / 1e9:.4f} Gbps (frame bits), "
          f"{stats.payload_goodput / 1e9:.4f} Gbps (payload)", file=out)
    print(f"bytes               {stats.total_bytes} total, {stats.control_bytes} control", file=out)
    print(f"control overhead    {control_overhead(stats):.6%}", file=out)
    if stats.mode is Mode.STOP_AND_WAIT:
        metrics = evaluate(cfg.headers, cfg.link, cfg.workload)
        report = validate_against_model(stats, metrics, tolerance=1e-3)
        verdict = "PASS" if report.passed else "FAIL"
        print(f"model validation    {verdict} (latency dev {report.max_latency_deviation:.2e}, "
              f"throughput dev {report.throughput_deviation:.2e}, tol {report.tolerance:g})", file=out)
        if report.outliers:
            print(f"                    {report.outliers} of {report.samples} round trips queued "
                  f"behind other traffic", file=out)
    else:
        print("model validation    n/a (closed form describes stop_and_wait)", file=out)


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = _build_parser().parse_args(argv)
        cfg = _resolve_config(args)
        if args.command == "eval":
            _print_metrics(cfg, out)
        elif args.command == "sweep":
            spec = SweepSpec(args.param, args.start, args.stop, args.steps,
                             baseline=(cfg.headers, cfg.link, cfg.workload))
            series = sweep(spec)
            write_csv(series, args.out)
            print(f"wrote {len(series)} rows to {args.out}", file=out)
        else:
            _run_sim(cfg, args, out)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (ConfigError, InvalidParameter, OSError, ZeroDivisionError) as exc:
        print(f"vrnet: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
