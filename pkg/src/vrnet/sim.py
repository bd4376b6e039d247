"""Deterministic discrete-event simulation of one client/server VR session.

A session runs in three phases:

* establishment: ``SESSION_REQUEST`` -> ``SESSION_ACCEPT`` -> ``SESSION_CONFIRM``,
  always initiated by the client;
* streaming: the server renders one VR frame every ``1/fps`` seconds and
  fragments it into DATA packets, the client ACKs every DATA packet, and the
  client sends a ``HEALTH_PING`` every ``health_check_period``, which the
  server answers with a ``HEALTH_PONG``;
* termination: ``SESSION_CLOSE`` -> ``CLOSE_ACK``, initiated by the client.

Each endpoint has one FIFO transmitter and one FIFO packet processor. A
message handed to the transmitter at ``send_time`` reaches the peer
application after

    queueing + size*8/data_rate + cable/propagation_speed + switch_delay + 1/ppr

so with empty queues the one-way delays match the closed-form data and ACK
latencies exactly. Nothing is random: ties between events are broken by
insertion order.

The ``SESSION_CONFIRM`` timestamp is the shared origin of the streaming
phase. Both sides stop originating stream traffic ``duration`` seconds later:
the server starts no DATA transmission at or after that instant and the
client sends no further pings. Frame fragments that cannot start in time are
dropped at the server. A VR frame counts as completed only if its last
fragment reaches the client inside the streaming window; frames finished
later are reported separately as late. The client closes the session once
the stream has drained.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .model import (
    HeaderStack,
    InvalidParameter,
    LinkParams,
    PerfMetrics,
    VRWorkload,
    check_compatible,
    frames_per_vr_frame,
    max_payload_size,
    total_latency,
)


class Mode(str, Enum):
    STOP_AND_WAIT = "stop_and_wait"
    PIPELINED = "pipelined"


class Kind(str, Enum):
    SESSION_REQUEST = "SESSION_REQUEST"
    SESSION_ACCEPT = "SESSION_ACCEPT"
    SESSION_CONFIRM = "SESSION_CONFIRM"
    DATA = "DATA"
    ACK = "ACK"
    HEALTH_PING = "HEALTH_PING"
    HEALTH_PONG = "HEALTH_PONG"
    SESSION_CLOSE = "SESSION_CLOSE"
    CLOSE_ACK = "CLOSE_ACK"


# ACKs of DATA are stream traffic: their cost is already inside the per-packet latency.
STREAM_KINDS = frozenset({Kind.DATA, Kind.ACK})
CONTROL_KINDS = frozenset(Kind) - STREAM_KINDS


class ClientState(str, Enum):
    IDLE = "Idle"
    CONNECT_SENT = "ConnectSent"
    ESTABLISHED = "Established"
    STREAMING = "Streaming"
    CLOSE_SENT = "CloseSent"
    CLOSED = "Closed"


class ServerState(str, Enum):
    LISTENING = "Listening"
    ACCEPTING = "Accepting"
    ESTABLISHED = "Established"
    STREAMING = "Streaming"
    CLOSED = "Closed"


CLIENT_TRANSITIONS = {
    ClientState.IDLE: {ClientState.CONNECT_SENT},
    ClientState.CONNECT_SENT: {ClientState.ESTABLISHED},
    ClientState.ESTABLISHED: {ClientState.STREAMING},
    ClientState.STREAMING: {ClientState.CLOSE_SENT},
    ClientState.CLOSE_SENT: {ClientState.CLOSED},
    ClientState.CLOSED: set(),
}

SERVER_TRANSITIONS = {
    ServerState.LISTENING: {ServerState.ACCEPTING},
    ServerState.ACCEPTING: {ServerState.ESTABLISHED},
    ServerState.ESTABLISHED: {ServerState.STREAMING},
    ServerState.STREAMING: {ServerState.CLOSED},
    ServerState.CLOSED: set(),
}


class ProtocolError(RuntimeError):
    """The simulated protocol did something its state machine forbids."""


class ConfigurationMismatch(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class SimMessage:
    kind: Kind
    seq: int
    frame_id: int
    size: int
    send_time: float
    sender: str
    # DATA: fragment index; ACK/PONG/CLOSE_ACK: seq of the message answered
    ref: int = -1


@dataclass(order=True, slots=True)
class SimEvent:
    time: float
    tiebreak: int
    action: Callable = field(compare=False)
    args: tuple = field(compare=False, default=())


@dataclass(frozen=True, slots=True)
class TraceRecord:
    message: SimMessage
    tx_start: float
    delivered: float


@dataclass(frozen=True)
class SimStats:
    mode: Mode
    streaming_duration: float
    rtt_samples: tuple[float, ...] = field(repr=False)
    goodput: float
    payload_goodput: float
    busy_time: float
    control_bytes: int
    stream_bytes: int
    total_bytes: int
    bytes_delivered: int
    message_counts: dict = field(repr=False)
    vr_frames_generated: int
    vr_frames_completed: int
    vr_frames_late: int
    achieved_fps: float
    session_duration: float
    client_states: tuple = field(repr=False)
    server_states: tuple = field(repr=False)
    headers: HeaderStack = field(repr=False)
    link: LinkParams = field(repr=False)
    workload: VRWorkload = field(repr=False)
    trace: tuple[TraceRecord, ...] | None = field(default=None, repr=False)

    @property
    def health_checks(self) -> int:
        return self.message_counts.get(Kind.HEALTH_PING, 0)


class _Endpoint:
    def __init__(self, name: str, initial, transitions):
        self.name = name
        self.state = initial
        self._transitions = transitions
        self.history = [(0.0, initial)]
        self.seq = itertools.count()
        self.tx_free_at = 0.0
        self.rx_free_at = 0.0
        self.finished_sending = False

    def move(self, new, now: float) -> None:
        if new not in self._transitions[self.state]:
            raise ProtocolError(f"{self.name}: illegal transition {self.state.value} -> {new.value}")
        self.state = new
        self.history.append((now, new))


class _Session:
    def __init__(self, h, link, w, mode, duration, record_trace):
        self.headers, self.link, self.workload = h, link, w
        self.mode = mode
        self.duration = duration
        self.now = 0.0
        self._queue: list[SimEvent] = []
        self._tiebreak = itertools.count()

        self._wire = link.cable_length / link.propagation_speed + link.switch_delay
        self._proc = 1 / link.ppr
        self._guard = total_latency(link)
        self._fragments = frames_per_vr_frame(w, h)
        self._payload = max_payload_size(h)

        self.client = _Endpoint("client", ClientState.IDLE, CLIENT_TRANSITIONS)
        self.server = _Endpoint("server", ServerState.LISTENING, SERVER_TRANSITIONS)
        self.origin = math.nan
        self.deadline = math.nan

        # server side
        self._pending: deque[list[int]] = deque()  # [frame_id, next_fragment]
        self._in_flight: dict[int, tuple[float, int]] = {}  # data seq -> (send_time, payload bytes)
        self._busy_since = 0.0
        self.busy_time = 0.0
        self.rtt_samples: list[float] = []
        self.data_bits_acked = 0
        self.payload_bits_acked = 0
        self.frames_generated = 0

        # client side
        self._received: dict[int, int] = {}
        self.frames_completed = 0
        self.frames_late = 0
        self._pings_outstanding = 0

        self.counts = {k: 0 for k in Kind}
        self.bytes_by_kind = {k: 0 for k in Kind}
        self.bytes_delivered = 0
        self.trace: list[TraceRecord] | None = [] if record_trace else None

    # -- event machinery ------------------------------------------------------

    def schedule(self, time: float, action: Callable, *args) -> None:
        heapq.heappush(self._queue, SimEvent(time, next(self._tiebreak), action, args))

    def run(self) -> None:
        self.client.move(ClientState.CONNECT_SENT, 0.0)
        self.send(self.client, self.server, Kind.SESSION_REQUEST)
        while self._queue:
            event = heapq.heappop(self._queue)
            if event.time < self.now:
                raise ProtocolError(f"time went backwards: {event.time} < {self.now}")
            self.now = event.time
            event.action(*event.args)
        if self.client.state is not ClientState.CLOSED or self.server.state is not ServerState.CLOSED:
            raise ProtocolError(
                f"session ended in {self.client.state.value}/{self.server.state.value}"
            )

    def send(self, src: _Endpoint, dst: _Endpoint, kind: Kind, *,
             frame_id: int = -1, ref: int = -1) -> SimMessage | None:
        """Hand a message to ``src``'s transmitter; returns None if a DATA packet misses the deadline."""
        if src.finished_sending:
            raise ProtocolError(f"{src.name} sent {kind.value} after closing")
        size = self.link.data_packet_len if kind is Kind.DATA else self.link.ack_packet_len
        start = max(self.now, src.tx_free_at)
        if kind is Kind.DATA and start >= self.deadline:
            return None
        msg = SimMessage(kind, next(src.seq), frame_id, size, self.now, src.name, ref)
        tx_end = start + size * 8 / self.link.data_rate
        src.tx_free_at = tx_end
        delivered = max(tx_end + self._wire, dst.rx_free_at) + self._proc
        dst.rx_free_at = delivered
        self.counts[kind] += 1
        self.bytes_by_kind[kind] += size
        if self.trace is not None:
            self.trace.append(TraceRecord(msg, start, delivered))
        if kind in (Kind.SESSION_CLOSE, Kind.CLOSE_ACK):
            src.finished_sending = True
        self.schedule(delivered, self._deliver, dst, msg)
        return msg

    def _deliver(self, dst: _Endpoint, msg: SimMessage) -> None:
        self.bytes_delivered += msg.size
        if dst is self.client:
            self._client_receive(msg)
        else:
            self._server_receive(msg)

    # -- client -----------------------------------------------------------------

    def _client_receive(self, msg: SimMessage) -> None:
        c = self.client
        state = c.state
        if msg.kind is Kind.SESSION_ACCEPT and state is ClientState.CONNECT_SENT:
            c.move(ClientState.ESTABLISHED, self.now)
            confirm = self.send(c, self.server, Kind.SESSION_CONFIRM)
            self._start_clock(confirm.send_time)
            c.move(ClientState.STREAMING, self.now)
            self._schedule_ping(1)
            self.schedule(self.deadline + self._guard, self._try_close)
        elif msg.kind is Kind.DATA and state is ClientState.STREAMING:
            self.send(c, self.server, Kind.ACK, frame_id=msg.frame_id, ref=msg.seq)
            got = self._received.get(msg.frame_id, 0) + 1
            if got == self._fragments:
                self._received.pop(msg.frame_id, None)
                if self.now <= self.deadline:
                    self.frames_completed += 1
                else:
                    self.frames_late += 1
            else:
                self._received[msg.frame_id] = got
        elif msg.kind is Kind.HEALTH_PONG and state is ClientState.STREAMING:
            self._pings_outstanding -= 1
        elif msg.kind is Kind.CLOSE_ACK and state is ClientState.CLOSE_SENT:
            c.move(ClientState.CLOSED, self.now)
        else:
            raise ProtocolError(f"client in {state.value} received {msg.kind.value}")

    def _schedule_ping(self, k: int) -> None:
        period = self.workload.health_check_period
        if k * period < self.duration:
            self.schedule(self.origin + k * period, self._ping, k)

    def _ping(self, k: int) -> None:
        self._pings_outstanding += 1
        self.send(self.client, self.server, Kind.HEALTH_PING)
        self._schedule_ping(k + 1)

    def _try_close(self) -> None:
        # wait for our own receive queue to drain and for every ping to be answered
        busy_until = self.client.rx_free_at
        if self._pings_outstanding or busy_until >= self.now:
            self.schedule(max(busy_until, self.now) + self._guard, self._try_close)
            return
        self.client.move(ClientState.CLOSE_SENT, self.now)
        self.send(self.client, self.server, Kind.SESSION_CLOSE)

    # -- server -----------------------------------------------------------------

    def _server_receive(self, msg: SimMessage) -> None:
        s = self.server
        state = s.state
        if msg.kind is Kind.SESSION_REQUEST and state is ServerState.LISTENING:
            s.move(ServerState.ACCEPTING, self.now)
            self.send(s, self.client, Kind.SESSION_ACCEPT, ref=msg.seq)
        elif msg.kind is Kind.SESSION_CONFIRM and state is ServerState.ACCEPTING:
            s.move(ServerState.ESTABLISHED, self.now)
            s.move(ServerState.STREAMING, self.now)
            self._schedule_frame(0)
        elif msg.kind is Kind.ACK and state is ServerState.STREAMING:
            self._on_ack(msg)
        elif msg.kind is Kind.HEALTH_PING and state is ServerState.STREAMING:
            self.send(s, self.client, Kind.HEALTH_PONG, ref=msg.seq)
        elif msg.kind is Kind.SESSION_CLOSE and state is ServerState.STREAMING:
            if self._in_flight:
                raise ProtocolError(f"close with {len(self._in_flight)} DATA packets unacknowledged")
            s.move(ServerState.CLOSED, self.now)
            self.send(s, self.client, Kind.CLOSE_ACK, ref=msg.seq)
        else:
            raise ProtocolError(f"server in {state.value} received {msg.kind.value}")

    def _start_clock(self, origin: float) -> None:
        self.origin = origin
        self.deadline = origin + self.duration

    def _schedule_frame(self, k: int) -> None:
        if k / self.workload.fps < self.duration:
            self.schedule(max(self.now, self.origin + k / self.workload.fps), self._new_frame, k)

    def _new_frame(self, k: int) -> None:
        self.frames_generated += 1
        self._pending.append([k, 0])
        self._pump()
        self._schedule_frame(k + 1)

    def _pump(self) -> None:
        pipelined = self.mode is Mode.PIPELINED
        while self._pending and (pipelined or not self._in_flight):
            entry = self._pending[0]
            frame_id, fragment = entry
            msg = self.send(self.server, self.client, Kind.DATA, frame_id=frame_id, ref=fragment)
            if msg is None:
                self._pending.clear()
                return
            payload = min(self._payload, self.workload.vr_frame_size - fragment * self._payload)
            if not self._in_flight:
                self._busy_since = self.now
            self._in_flight[msg.seq] = (msg.send_time, payload)
            entry[1] += 1
            if entry[1] == self._fragments:
                self._pending.popleft()

    def _on_ack(self, msg: SimMessage) -> None:
        send_time, payload = self._in_flight.pop(msg.ref)
        self.rtt_samples.append(self.now - send_time)
        self.data_bits_acked += self.link.data_packet_len * 8
        self.payload_bits_acked += payload * 8
        if not self._in_flight:
            self.busy_time += self.now - self._busy_since
        if self.mode is Mode.STOP_AND_WAIT:
            self._pump()

    # -- results ----------------------------------------------------------------

    def stats(self) -> SimStats:
        control = sum(self.bytes_by_kind[k] for k in CONTROL_KINDS)
        stream = sum(self.bytes_by_kind[k] for k in STREAM_KINDS)
        busy = self.busy_time
        return SimStats(
            mode=self.mode,
            streaming_duration=self.duration,
            rtt_samples=tuple(self.rtt_samples),
            goodput=self.data_bits_acked / busy if busy > 0 else 0.0,
            payload_goodput=self.payload_bits_acked / busy if busy > 0 else 0.0,
            busy_time=busy,
            control_bytes=control,
            stream_bytes=stream,
            total_bytes=control + stream,
            bytes_delivered=self.bytes_delivered,
            message_counts=dict(self.counts),
            vr_frames_generated=self.frames_generated,
            vr_frames_completed=self.frames_completed,
            vr_frames_late=self.frames_late,
            achieved_fps=self.frames_completed / self.duration,
            session_duration=self.now,
            client_states=tuple(self.client.history),
            server_states=tuple(self.server.history),
            headers=self.headers,
            link=self.link,
            workload=self.workload,
            trace=tuple(self.trace) if self.trace is not None else None,
        )


def run_session(
    h: HeaderStack,
    link: LinkParams,
    w: VRWorkload,
    mode: Mode | str = Mode.STOP_AND_WAIT,
    duration: float = 1.0,
    *,
    record_trace: bool = False,
) -> SimStats:
    """Simulate a complete session with ``duration`` seconds of streaming.

    With ``record_trace=True`` every transmitted message is kept in
    ``SimStats.trace`` together with its transmit start and delivery times.
    """
    try:
        mode = Mode(mode)
    except ValueError:
        raise InvalidParameter("session", "mode", f"unknown mode {mode!r}") from None
    if isinstance(duration, bool) or not isinstance(duration, (int, float)) \
            or not math.isfinite(duration) or duration <= 0:
        raise InvalidParameter("session", "duration", f"must be a finite number > 0, got {duration!r}")
    check_compatible(h, link)
    session = _Session(h, link, w, mode, float(duration), record_trace)
    session.run()
    return session.stats()


def control_overhead(stats: SimStats) -> float:
    """Share of all transmitted bytes spent on session control messages."""
    if stats.stream_bytes == 0 or stats.total_bytes == 0:
        raise ZeroDivisionError("no stream traffic in this session")
    return stats.control_bytes / stats.total_bytes


@dataclass(frozen=True)
class ValidationReport:
    samples: int
    outliers: int  # samples whose deviation exceeds the tolerance
    max_latency_deviation: float
    throughput_deviation: float
    tolerance: float

    @property
    def latency_ok(self) -> bool:
        return self.max_latency_deviation <= self.tolerance

    @property
    def throughput_ok(self) -> bool:
        return self.throughput_deviation <= self.tolerance

    @property
    def passed(self) -> bool:
        return self.latency_ok and self.throughput_ok


def validate_against_model(stats: SimStats, metrics: PerfMetrics, tolerance: float = 1e-3) -> ValidationReport:
    """Compare a stop-and-wait run against the closed form it should reproduce.

    Deviations are relative: per-sample RTT against ``metrics.total_latency``
    (worst case reported) and measured goodput against ``metrics.throughput``.
    """
    for name in ("headers", "link", "workload"):
        if getattr(stats, name) != getattr(metrics, name):
            raise ConfigurationMismatch(
                f"stats and metrics were produced from different {name}: "
                f"{getattr(stats, name)} != {getattr(metrics, name)}"
            )
    if stats.mode is not Mode.STOP_AND_WAIT:
        raise InvalidParameter("stats", "mode", "model validation needs a stop_and_wait run")
    if not stats.rtt_samples:
        raise InvalidParameter("stats", "rtt_samples", "run produced no acknowledged DATA")
    expected = metrics.total_latency
    deviations = [abs(s - expected) / expected for s in stats.rtt_samples]
    tput = abs(stats.goodput - metrics.throughput) / metrics.throughput
    outliers = sum(d > tolerance for d in deviations)
    return ValidationReport(len(deviations), outliers, max(deviations), tput, tolerance)
