"""Latency/throughput model and session simulator for VR video over UDP/Ethernet."""

from .model import (
    HeaderStack,
    InvalidParameter,
    LinkParams,
    OverloadWarning,
    PerfMetrics,
    VRWorkload,
    ack_latency,
    data_network_delay,
    ethernet_data_latency,
    evaluate,
    frames_per_vr_frame,
    max_payload_size,
    network_utilization,
    throughput,
    total_latency,
)
from .sim import (
    ConfigurationMismatch,
    Mode,
    ProtocolError,
    SimStats,
    ValidationReport,
    control_overhead,
    run_session,
    validate_against_model,
)
from .sweep import SweepSeries, SweepSpec, baseline_config, sweep

__all__ = [
    "ConfigurationMismatch",
    "HeaderStack",
    "InvalidParameter",
    "LinkParams",
    "Mode",
    "OverloadWarning",
    "PerfMetrics",
    "ProtocolError",
    "SimStats",
    "SweepSeries",
    "SweepSpec",
    "VRWorkload",
    "ValidationReport",
    "ack_latency",
    "baseline_config",
    "control_overhead",
    "data_network_delay",
    "ethernet_data_latency",
    "evaluate",
    "frames_per_vr_frame",
    "max_payload_size",
    "network_utilization",
    "run_session",
    "sweep",
    "throughput",
    "total_latency",
    "validate_against_model",
]
