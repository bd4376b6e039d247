"""Closed-form latency, throughput and utilization for a UDP/Ethernet VR stream.

Every function here is pure. Times are seconds, sizes are whole bytes and
rates are bits per second.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field


class InvalidParameter(ValueError):
    """A parameter violates its domain; ``owner``/``field`` name the culprit."""

    def __init__(self, owner: str, field: str, message: str):
        self.owner = owner
        self.field = field
        super().__init__(f"{owner}.{field}: {message}")


class OverloadWarning(UserWarning):
    """Offered load exceeds link capacity (utilization > 1)."""


def _require(cond: bool, owner: str, name: str, message: str) -> None:
    if not cond:
        raise InvalidParameter(owner, name, message)


def _check_size(owner: str, name: str, value) -> None:
    _require(
        isinstance(value, int) and not isinstance(value, bool),
        owner, name, f"must be an integer byte count, got {value!r}",
    )
    _require(value >= 0, owner, name, f"must be >= 0, got {value}")


def _check_real(owner: str, name: str, value, *, positive: bool, finite: bool) -> None:
    _require(
        isinstance(value, (int, float)) and not isinstance(value, bool),
        owner, name, f"must be a real number, got {value!r}",
    )
    _require(not math.isnan(value), owner, name, "must not be NaN")
    if finite:
        _require(math.isfinite(value), owner, name, f"must be finite, got {value}")
    if positive:
        _require(value > 0, owner, name, f"must be > 0, got {value}")
    else:
        _require(value >= 0, owner, name, f"must be >= 0, got {value}")


@dataclass(frozen=True)
class HeaderStack:
    """Per-packet header sizes and the MTU they are carved out of.

    The MTU is treated as including the Ethernet header, so all four
    headers come out of it.
    """

    eth_header: int = 14
    ip_header: int = 20
    udp_header: int = 8
    vr_header: int = 26
    mtu: int = 1500

    def __post_init__(self) -> None:
        for name in ("eth_header", "ip_header", "udp_header", "vr_header", "mtu"):
            _check_size("HeaderStack", name, getattr(self, name))
        _require(
            self.header_bytes < self.mtu,
            "HeaderStack", "mtu",
            f"headers sum to {self.header_bytes} bytes, leaving no payload in mtu {self.mtu}",
        )

    @property
    def header_bytes(self) -> int:
        return self.eth_header + self.ip_header + self.udp_header + self.vr_header


@dataclass(frozen=True)
class LinkParams:
    """A client-switch-server Ethernet path.

    ``ppr`` is the packet processing rate of the receiving node in packets per
    second; ``math.inf`` removes the processing term. ``data_rate`` may also be
    infinite to obtain the serialization-free asymptote.
    """

    cable_length: float = 10.0
    propagation_speed: float = 2e8
    data_rate: float = 1e9
    switch_delay: float = 1e-6
    ppr: float = 205_000.0
    data_packet_len: int = 1500
    ack_packet_len: int = 64

    def __post_init__(self) -> None:
        _check_real("LinkParams", "cable_length", self.cable_length, positive=False, finite=True)
        _check_real("LinkParams", "propagation_speed", self.propagation_speed, positive=True, finite=False)
        _check_real("LinkParams", "data_rate", self.data_rate, positive=True, finite=False)
        _check_real("LinkParams", "switch_delay", self.switch_delay, positive=False, finite=True)
        _check_real("LinkParams", "ppr", self.ppr, positive=True, finite=False)
        _check_size("LinkParams", "data_packet_len", self.data_packet_len)
        _check_size("LinkParams", "ack_packet_len", self.ack_packet_len)


@dataclass(frozen=True)
class VRWorkload:
    vr_frame_size: int = 2**20
    fps: float = 60.0
    health_check_period: float = 0.05

    def __post_init__(self) -> None:
        _check_size("VRWorkload", "vr_frame_size", self.vr_frame_size)
        _require(self.vr_frame_size > 0, "VRWorkload", "vr_frame_size", "must be > 0")
        _check_real("VRWorkload", "fps", self.fps, positive=True, finite=True)
        # inf disables health checks
        _check_real("VRWorkload", "health_check_period", self.health_check_period,
                    positive=True, finite=False)


@dataclass(frozen=True)
class PerfMetrics:
    max_payload: int
    data_network_delay: float
    eth_data_latency: float
    ack_latency: float
    total_latency: float
    throughput: float
    frames_per_vr_frame: int
    utilization: float
    headers: HeaderStack = field(repr=False)
    link: LinkParams = field(repr=False)
    workload: VRWorkload = field(repr=False)

    @property
    def overloaded(self) -> bool:
        return self.utilization > 1.0


def check_compatible(h: HeaderStack, link: LinkParams) -> None:
    """Cross-type constraints that neither dataclass can check alone."""
    _require(
        link.data_packet_len <= h.mtu,
        "LinkParams", "data_packet_len",
        f"{link.data_packet_len} bytes exceeds mtu {h.mtu}",
    )


def max_payload_size(h: HeaderStack) -> int:
    payload = h.mtu - h.eth_header - h.ip_header - h.udp_header - h.vr_header
    _require(payload > 0, "HeaderStack", "mtu", "headers leave no payload")
    return payload


def data_network_delay(packet_len: int, link: LinkParams) -> float:
    """Serialization of ``packet_len`` bytes plus propagation over the cable."""
    if packet_len < 0:
        raise InvalidParameter("packet", "packet_len", f"must be >= 0, got {packet_len}")
    return packet_len * 8 / link.data_rate + link.cable_length / link.propagation_speed


def _endpoint_delay(packet_len: int, link: LinkParams) -> float:
    return data_network_delay(packet_len, link) + link.switch_delay + 1 / link.ppr


def ethernet_data_latency(link: LinkParams) -> float:
    return _endpoint_delay(link.data_packet_len, link)


def ack_latency(link: LinkParams) -> float:
    return _endpoint_delay(link.ack_packet_len, link)


def total_latency(link: LinkParams) -> float:
    return ethernet_data_latency(link) + ack_latency(link)


def throughput(link: LinkParams) -> float:
    """Full data-frame bits per stop-and-wait cycle, in bits/second."""
    return link.data_packet_len * 8 / total_latency(link)


def frames_per_vr_frame(w: VRWorkload, h: HeaderStack) -> int:
    payload = max_payload_size(h)
    # integer ceiling; float division would misround for huge frames
    return -(-w.vr_frame_size // payload)


def _utilization(link: LinkParams, w: VRWorkload, h: HeaderStack) -> float:
    check_compatible(h, link)
    bits_per_second = (
        (link.data_packet_len + link.ack_packet_len) * frames_per_vr_frame(w, h) * w.fps * 8
    )
    return bits_per_second / link.data_rate


def network_utilization(link: LinkParams, w: VRWorkload, h: HeaderStack) -> float:
    """Fraction of ``data_rate`` used by data packets plus their ACKs.

    Values above 1 mean the offered load cannot be carried; an
    :class:`OverloadWarning` is issued but the value is still returned.
    :func:`evaluate` reports the same condition through
    ``PerfMetrics.overloaded`` instead of warning.
    """
    utilization = _utilization(link, w, h)
    if utilization > 1.0:
        warnings.warn(
            f"network utilization {utilization:.4f} exceeds link capacity",
            OverloadWarning,
            stacklevel=2,
        )
    return utilization


def evaluate(h: HeaderStack, link: LinkParams, w: VRWorkload) -> PerfMetrics:
    check_compatible(h, link)
    return PerfMetrics(
        max_payload=max_payload_size(h),
        data_network_delay=data_network_delay(link.data_packet_len, link),
        eth_data_latency=ethernet_data_latency(link),
        ack_latency=ack_latency(link),
        total_latency=total_latency(link),
        throughput=throughput(link),
        frames_per_vr_frame=frames_per_vr_frame(w, h),
        utilization=_utilization(link, w, h),
        headers=h,
        link=link,
        workload=w,
    )
