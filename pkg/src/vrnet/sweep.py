"""One-parameter sweeps around the reference VR configuration."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .model import HeaderStack, InvalidParameter, LinkParams, PerfMetrics, VRWorkload, evaluate

Baseline = tuple[HeaderStack, LinkParams, VRWorkload]

# config-file / CLI spelling -> LinkParams field
PARAMETER_ALIASES = {
    "cable_m": "cable_length",
    "data_rate_bps": "data_rate",
    "ppr": "ppr",
    "cable_length": "cable_length",
    "data_rate": "data_rate",
}
SWEEPABLE = ("cable_length", "data_rate", "ppr")

# (start, stop, steps). The ppr window is a chosen bracket around 205k.
DEFAULT_RANGES = {
    "cable_length": (0.0, 1000.0, 11),
    "data_rate": (0.1e9, 2.5e9, 25),
    "ppr": (50_000.0, 500_000.0, 10),
}


def baseline_config() -> Baseline:
    """Reference setup: 10 m cable, 1 Gbit/s, 205k packets/s, 1 MiB frames at 60 fps."""
    headers = HeaderStack(eth_header=14, ip_header=20, udp_header=8, vr_header=26, mtu=1500)
    link = LinkParams(
        cable_length=10.0,
        propagation_speed=2e8,
        data_rate=1e9,
        switch_delay=1e-6,
        ppr=205_000.0,
        data_packet_len=1500,
        ack_packet_len=64,
    )
    workload = VRWorkload(vr_frame_size=2**20, fps=60.0, health_check_period=0.05)
    return headers, link, workload


def canonical_parameter(name: str) -> str:
    try:
        return PARAMETER_ALIASES[name]
    except KeyError:
        raise InvalidParameter(
            "SweepSpec", "parameter",
            f"unknown sweep parameter {name!r}; expected one of {', '.join(SWEEPABLE)}",
        ) from None


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    steps: int
    baseline: Baseline | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "parameter", canonical_parameter(self.parameter))
        if not self.start < self.stop:
            raise InvalidParameter(
                "SweepSpec", "stop", f"start ({self.start}) must be below stop ({self.stop})"
            )
        if isinstance(self.steps, bool) or not isinstance(self.steps, int) or self.steps < 2:
            raise InvalidParameter("SweepSpec", "steps", f"need an integer >= 2, got {self.steps!r}")
        if self.baseline is None:
            object.__setattr__(self, "baseline", baseline_config())

    @classmethod
    def default(cls, parameter: str, baseline: Baseline | None = None) -> SweepSpec:
        start, stop, steps = DEFAULT_RANGES[canonical_parameter(parameter)]
        return cls(parameter, start, stop, steps, baseline)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class SweepSeries:
    parameter: str
    points: tuple[tuple[float, PerfMetrics], ...]

    def __len__(self) -> int:
        return len(self.points)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for v, _ in self.points])

    def column(self, name: str) -> np.ndarray:
        """Array of one PerfMetrics field across the series."""
        return np.array([getattr(m, name) for _, m in self.points])


def evaluate_point(spec: SweepSpec, value: float) -> PerfMetrics:
    headers, link, workload = spec.baseline
    return evaluate(headers, dataclasses.replace(link, **{spec.parameter: float(value)}), workload)


def sweep(spec: SweepSpec) -> SweepSeries:
    points = []
    for i, value in enumerate(spec.values()):
        value = float(value)
        try:
            metrics = evaluate_point(spec, value)
        except InvalidParameter as exc:
            raise InvalidParameter(
                "SweepSpec", spec.parameter, f"point {i} ({spec.parameter}={value!r}) invalid: {exc}"
            ) from exc
        points.append((value, metrics))
    return SweepSeries(spec.parameter, tuple(points))
