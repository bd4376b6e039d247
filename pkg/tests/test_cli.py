import dataclasses
import io
import math
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vrnet.cli import (
    CSV_COLUMNS,
    Config,
    ConfigError,
    main,
    parse_config,
    read_csv,
    render_config,
    write_csv,
)
from vrnet.model import HeaderStack, LinkParams, VRWorkload, max_payload_size
from vrnet.sim import Mode
from vrnet.sweep import SweepSpec, baseline_config, sweep


def test_empty_config_is_baseline():
    cfg = parse_config("")
    assert (cfg.headers, cfg.link, cfg.workload) == baseline_config()
    assert cfg.mode is Mode.STOP_AND_WAIT and cfg.duration == 1.0


def test_mtu_override_only():
    cfg = parse_config("mtu = 9000\n")
    assert max_payload_size(cfg.headers) == 8932
    h, link, w = baseline_config()
    assert cfg.link == link and cfg.workload == w
    assert dataclasses.replace(cfg.headers, mtu=1500) == h


def test_comments_and_scientific_notation():
    cfg = parse_config("# reference\n\ndata_rate_bps = 2.5e9  # 2.5 Gbit/s\nvr_frame_bytes = 1e6\nmode = pipelined\n")
    assert cfg.link.data_rate == 2.5e9
    assert cfg.workload.vr_frame_size == 10**6
    assert cfg.mode is Mode.PIPELINED


def test_malformed_value_names_line():
    with pytest.raises(ConfigError) as err:
        parse_config("mtu = banana")
    assert err.value.line == 1
    assert "line 1" in str(err.value)


@pytest.mark.parametrize("text,line,key", [
    ("\n\nbogus = 3", 3, "bogus"),
    ("cable_m = 1\ncable_m = 2", 2, "cable_m"),
    ("ack_packet_bytes = 64.5", 1, "ack_packet_bytes"),
    ("mode = sliding", 1, "mode"),
    ("just text", 1, None),
])
def test_parse_errors(text, line, key):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.line == line
    assert err.value.key == key


def test_model_violation_reported_with_key():
    with pytest.raises(ConfigError) as err:
        parse_config("fps = 10\nppr = 0\n")
    assert err.value.key == "ppr" and err.value.line == 2
    with pytest.raises(ConfigError) as err:
        parse_config("mtu = 60")
    assert err.value.key == "mtu"
    with pytest.raises(ConfigError) as err:
        parse_config("data_packet_bytes = 1600")
    assert err.value.key == "data_packet_bytes"
    with pytest.raises(ConfigError) as err:
        parse_config("duration_s = 0")
    assert err.value.key == "duration_s"


@st.composite
def configs(draw):
    h = HeaderStack(*(draw(st.integers(0, 100)) for _ in range(4)), mtu=draw(st.integers(401, 9000)))
    link = LinkParams(
        cable_length=draw(st.floats(0, 1e4)),
        propagation_speed=draw(st.floats(1e6, 3e8)),
        data_rate=draw(st.floats(1e3, 1e12)),
        switch_delay=draw(st.floats(0, 1)),
        ppr=draw(st.one_of(st.floats(1, 1e9), st.just(math.inf))),
        data_packet_len=draw(st.integers(0, h.mtu)),
        ack_packet_len=draw(st.integers(0, 5000)),
    )
    w = VRWorkload(draw(st.integers(1, 10**9)), draw(st.floats(0.1, 1000)),
                   draw(st.one_of(st.floats(1e-6, 1e3), st.just(math.inf))))
    return Config(h, link, w, draw(st.sampled_from(list(Mode))), draw(st.floats(1e-6, 1e4)))


@given(configs())
@settings(max_examples=150)
def test_config_round_trip(cfg):
    assert parse_config(render_config(cfg)) == cfg


def _series(steps=11):
    return sweep(SweepSpec("cable_length", 0, 1000, steps))


def test_csv_layout(tmp_path):
    path = tmp_path / "s.csv"
    write_csv(_series(), path)
    raw = path.read_bytes()
    lines = raw.decode().split("\n")
    assert b"\r" not in raw
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(raw.decode().splitlines()) == 12
    assert all(row.startswith("cable_m,") for row in lines[1:-1])
    # plain decimal numbers: no exponents, no thousands separators
    for row in lines[1:-1]:
        for cell in row.split(",")[1:]:
            assert re.fullmatch(r"\d+(\.\d+)?", cell), cell


def test_csv_round_trip_precision(tmp_path):
    series = _series()
    path = tmp_path / "s.csv"
    write_csv(series, path)
    rows = read_csv(path)
    for row, (value, m) in zip(rows, series.points):
        assert row["param_value"] == pytest.approx(value, rel=1e-6)
        assert row["total_latency_us"] == pytest.approx(m.total_latency * 1e6, rel=1e-6)
        assert row["throughput_gbps"] == pytest.approx(m.throughput / 1e9, rel=1e-6)
        assert row["utilization"] == pytest.approx(m.utilization, rel=1e-6)
        assert row["frames_per_vr_frame"] == m.frames_per_vr_frame


def test_csv_baseline_point():
    series = sweep(SweepSpec("cable_length", 10, 20, 2))
    buf = io.StringIO()
    write_csv(series, buf)
    row = read_csv(io.StringIO(buf.getvalue()))[0]
    assert f"{row['total_latency_us']:.6g}" == "24.3681"
    assert row["total_latency_us"] == pytest.approx(24.368, abs=1e-3)
    assert row["throughput_gbps"] == pytest.approx(0.4924, abs=1e-4)


def test_csv_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(_series(), a)
    write_csv(_series(), b)
    assert a.read_bytes() == b.read_bytes()


def test_csv_unwritable(tmp_path):
    target = tmp_path / "missing" / "s.csv"
    with pytest.raises(OSError) as err:
        write_csv(_series(), target)
    assert str(target) in str(err.value)


# -- command line ----------------------------------------------------------------

def run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def test_eval_baseline():
    code, out = run(["eval", "--config", "baseline"])
    assert code == 0
    assert "24.368 us" in out
    assert "0.4924 Gbps" in out
    assert "733" in out


def test_eval_set_overrides():
    code, out = run(["eval", "--set", "cable_m=1000"])
    assert code == 0 and "34.268 us" in out


def test_eval_overload_flagged():
    code, out = run(["eval", "--set", "data_rate_bps=5e8"])
    assert code == 0 and "OVERLOADED" in out


def test_sweep_writes_csv(tmp_path):
    out_path = tmp_path / "s.csv"
    code, _ = run(["sweep", "--param", "cable_m", "--from", "0", "--to", "1000",
                   "--steps", "11", "--out", str(out_path)])
    assert code == 0
    assert len(read_csv(out_path)) == 11


def test_sweep_uses_config_file(tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text("ppr = 1e6\n")
    out_path = tmp_path / "s.csv"
    code, _ = run(["sweep", "--param", "data_rate_bps", "--from", "1e9", "--to", "2e9",
                   "--steps", "2", "--out", str(out_path), "--config", str(cfg)])
    assert code == 0
    expected = sweep(SweepSpec("data_rate", 1e9, 2e9, 2,
                               baseline=baseline_config()[:1] + (LinkParams(ppr=1e6),) + baseline_config()[2:]))
    assert read_csv(out_path)[0]["total_latency_us"] == pytest.approx(
        expected.points[0][1].total_latency * 1e6, rel=1e-12)


@pytest.mark.parametrize("argv", [
    ["sweep", "--param", "bogus", "--from", "0", "--to", "1", "--steps", "2", "--out", "x.csv"],
    ["frobnicate"],
    [],
    ["eval", "--nope"],
    ["sweep", "--param", "ppr"],
    ["eval", "--set", "novalue"],
    ["sim", "--mode", "gbn"],
])
def test_usage_errors_exit_1(argv):
    assert run(argv)[0] == 1


def test_domain_errors_exit_2(tmp_path):
    bad = tmp_path / "bad.conf"
    bad.write_text("mtu = banana\n")
    assert run(["eval", "--config", str(bad)])[0] == 2
    assert run(["eval", "--config", str(tmp_path / "nope.conf")])[0] == 2
    assert run(["sweep", "--param", "ppr", "--from", "5", "--to", "5", "--steps", "3",
                "--out", str(tmp_path / "x.csv")])[0] == 2
    assert run(["sweep", "--param", "cable_m", "--from", "0", "--to", "5", "--steps", "3",
                "--out", str(tmp_path / "no" / "x.csv")])[0] == 2
    assert run(["sim", "--duration", "0"])[0] == 2


def test_env_config(tmp_path, monkeypatch):
    cfg = tmp_path / "env.conf"
    cfg.write_text("cable_m = 1000\n")
    monkeypatch.setenv("VRNET_CONFIG", str(cfg))
    code, out = run(["eval"])
    assert code == 0 and "34.268 us" in out
    code, out = run(["eval", "--config", "baseline"])
    assert "24.368 us" in out


def test_sim_low_load_prints_verdict(tmp_path):
    cfg = tmp_path / "low.conf"
    cfg.write_text("fps = 1\nvr_frame_bytes = 14320\n")
    code, out = run(["sim", "--config", str(cfg), "--duration", "2"])
    assert code == 0
    assert "model validation    PASS" in out
    assert "control overhead" in out


def test_sim_pipelined():
    code, out = run(["sim", "--mode", "pipelined", "--duration", "0.1"])
    assert code == 0
    assert "6/6 (60 fps)" in out
    assert "n/a" in out


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0


def test_set_error_is_labelled(capsys):
    assert run(["eval", "--set", "mtu=banana"])[0] == 2
    assert "--set: bad value for mtu" in capsys.readouterr().err


def test_set_overrides_config_file(tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text("cable_m = 500\n")
    code, out = run(["eval", "--config", str(cfg), "--set", "cable_m=1000"])
    assert code == 0 and "34.268 us" in out


def test_sim_baseline_reports_queued_samples():
    code, out = run(["sim", "--duration", "0.2"])
    assert code == 0
    assert "model validation" in out
