"""Active flows, the flow state tracker, and trace CSV I/O."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .topology import shortest_path

ARR, EXP, BYT = "ARR", "EXP", "BYT"
TRACE_HEADER = "time,kind,flow_id,src,dst,path,bytes"


class FlowError(ValueError):
    pass


class TraceParseError(FlowError):
    def __init__(self, lineno, msg):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


@dataclass(frozen=True)
class Flow:
    id: str
    src: str
    dst: str
    path: tuple
    arrival_time: float = 0.0
    expiry_time: float | None = None

    def __post_init__(self):
        if not self.path:
            raise FlowError(f"flow {self.id}: empty path")
        if len(set(self.path)) != len(self.path):
            raise FlowError(f"flow {self.id}: path revisits a switch")
        if self.expiry_time is not None and not self.arrival_time < self.expiry_time:
            raise FlowError(f"flow {self.id}: expiry must follow arrival")


def validate_path(topology, path):
    for v in path:
        if not 0 <= v < topology.n:
            raise FlowError(f"switch {v} not in topology")
    for u, v in zip(path, path[1:]):
        if not topology.has_edge(u, v):
            raise FlowError(f"path hop {u}->{v} is not a link")


@dataclass(frozen=True)
class TraceEvent:
    time: float
    kind: str
    flow_id: str
    flow: Flow | None = None
    bytes: int = 0


class Notification(NamedTuple):
    kind: str
    flow: Flow
    counter: int


class FlowStateTracker:
    """Active flow set plus the per-switch index ``switch -> flow ids``.

    Byte counters are cumulative per flow; an expiry hands back the final
    value, standing in for the switch's flow-removed message.
    """

    def __init__(self, n_switches, topology=None):
        self.n = n_switches
        self.topology = topology
        self.active = {}
        self.index = [set() for _ in range(n_switches)]
        self.counters = {}
        self.last_time = float("-inf")

    @property
    def m(self):
        return len(self.active)

    def add_flow(self, flow):
        if flow.id in self.active:
            raise FlowError(f"flow {flow.id} already active")
        if self.topology is not None:
            validate_path(self.topology, flow.path)
        for v in flow.path:
            if not 0 <= v < self.n:
                raise FlowError(f"flow {flow.id}: switch {v} out of range")
        self.active[flow.id] = flow
        self.counters[flow.id] = 0
        for v in flow.path:
            self.index[v].add(flow.id)

    def remove_flow(self, flow_id):
        try:
            flow = self.active.pop(flow_id)
        except KeyError:
            raise FlowError(f"unknown flow {flow_id}") from None
        for v in flow.path:
            self.index[v].discard(flow_id)
        return flow, self.counters.pop(flow_id)

    def apply_event(self, event):
        if event.time < self.last_time:
            raise FlowError(f"event at t={event.time} precedes t={self.last_time}")
        self.last_time = event.time
        if event.kind == ARR:
            self.add_flow(event.flow)
            return Notification(ARR, event.flow, 0)
        if event.kind == EXP:
            flow, counter = self.remove_flow(event.flow_id)
            return Notification(EXP, flow, counter)
        if event.kind == BYT:
            if event.flow_id not in self.active:
                raise FlowError(f"unknown flow {event.flow_id}")
            if event.bytes < 0:
                raise FlowError("byte increments must be non-negative")
            self.counters[event.flow_id] += event.bytes
            return None
        raise FlowError(f"unknown event kind {event.kind!r}")

    def snapshot(self):
        """Active flows in arrival order, as an immutable tuple."""
        return tuple(self.active.values())

    def switch_flows(self, v):
        return frozenset(self.index[v])

    def rebuild_index(self):
        index = [set() for _ in range(self.n)]
        for fid, flow in self.active.items():
            for v in flow.path:
                index[v].add(fid)
        return index


def generate_random_flows(t, m, seed=0, start_id=0):
    """``m`` flows between uniformly random distinct switches, shortest-path routed."""
    if t.n < 2:
        raise FlowError("need at least two switches")
    rng = np.random.default_rng(seed)
    src = rng.integers(0, t.n, size=m)
    dst = rng.integers(0, t.n - 1, size=m)
    dst = dst + (dst >= src)
    flows = []
    for i, (s, d) in enumerate(zip(src.tolist(), dst.tolist())):
        flows.append(Flow(f"f{start_id + i}", str(s), str(d), tuple(shortest_path(t, s, d))))
    return flows


def _fmt_time(x):
    return repr(float(x))


def write_trace(events):
    """Serialise events to trace CSV text (header row included)."""
    out = io.StringIO()
    out.write(TRACE_HEADER + "\n")
    for ev in events:
        if ev.kind == ARR:
            f = ev.flow
            path = ";".join(str(v) for v in f.path)
            out.write(f"{_fmt_time(ev.time)},ARR,{ev.flow_id},{f.src},{f.dst},{path}\n")
        elif ev.kind == EXP:
            out.write(f"{_fmt_time(ev.time)},EXP,{ev.flow_id}\n")
        else:
            out.write(f"{_fmt_time(ev.time)},BYT,{ev.flow_id},{ev.bytes}\n")
    return out.getvalue()


def parse_trace(source, topology=None):
    """Parse trace CSV text into a time-ordered event list.

    Rows are ``time,kind,flow_id[,src,dst,path][,bytes]``. Blank lines,
    ``#`` comments and a leading ``time,...`` header are skipped. Events
    with equal time keep file order.
    """
    events = []
    expiry = {}
    arrivals = {}
    for lineno, row in enumerate(csv.reader(io.StringIO(source)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        if row[0].strip() == "time":
            continue
        row = [c.strip() for c in row]
        try:
            time = float(row[0])
        except ValueError:
            raise TraceParseError(lineno, f"bad time {row[0]!r}") from None
        if len(row) < 3:
            raise TraceParseError(lineno, "expected at least time,kind,flow_id")
        kind, fid = row[1], row[2]
        if kind == ARR:
            if len(row) != 6:
                raise TraceParseError(lineno, "ARR needs src,dst,path")
            try:
                path = tuple(int(v) for v in row[5].split(";"))
            except ValueError:
                raise TraceParseError(lineno, f"bad path {row[5]!r}") from None
            try:
                flow = Flow(fid, row[3], row[4], path, arrival_time=time)
                if topology is not None:
                    validate_path(topology, path)
            except FlowError as exc:
                raise TraceParseError(lineno, str(exc)) from None
            arrivals[fid] = len(events)
            events.append(TraceEvent(time, ARR, fid, flow))
        elif kind == EXP:
            if len(row) != 3:
                raise TraceParseError(lineno, "EXP takes no extra fields")
            expiry[fid] = time
            events.append(TraceEvent(time, EXP, fid))
        elif kind == BYT:
            if len(row) != 4:
                raise TraceParseError(lineno, "BYT needs a byte count")
            try:
                nbytes = int(row[3])
            except ValueError:
                raise TraceParseError(lineno, f"bad byte count {row[3]!r}") from None
            if nbytes < 0:
                raise TraceParseError(lineno, "negative byte increment")
            events.append(TraceEvent(time, BYT, fid, bytes=nbytes))
        else:
            raise TraceParseError(lineno, f"unknown kind {kind!r}")
    # attach expiry times to the arrival records so flows carry their lifetime
    for fid, pos in arrivals.items():
        if fid in expiry and expiry[fid] > events[pos].time:
            ev = events[pos]
            f = ev.flow
            flow = Flow(f.id, f.src, f.dst, f.path, f.arrival_time, expiry[fid])
            events[pos] = TraceEvent(ev.time, ARR, fid, flow)
    order = sorted(range(len(events)), key=lambda i: events[i].time)
    return [events[i] for i in order]


def replay(events, tracker):
    """Apply events in order; returns the peak active flow count."""
    peak = tracker.m
    for ev in events:
        tracker.apply_event(ev)
        if tracker.m > peak:
            peak = tracker.m
    return peak
