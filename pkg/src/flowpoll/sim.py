"""Clocked, trace-driven experiments tying the library together.

Every experiment is sequential and deterministic under its seeds. Trace
events and evaluation ticks share one queue ordered by ``(time, sequence)``;
events stamped exactly on a tick are applied before the tick fires.
"""

from __future__ import annotations

import hashlib
import heapq
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from . import afps, loss, mcps
from .costs import CostModel, MultiController, parse_mode
from .dynamics import ARI, DynamicScheme, Fixed, parse_policy
from .flows import ARR, BYT, EXP, FlowStateTracker, generate_random_flows, parse_trace
from .synthetic import generate_events, get_profile
from .topology import parse_topology_spec


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    topology: str = "er:200"
    mode: str = "oob"
    workload: dict = field(default_factory=lambda: {"kind": "random", "m": 20000})
    policy: str = "ari:0.3"
    fixed_interval: float = 10.0
    sampler: dict = field(default_factory=dict)
    loss: dict = field(default_factory=lambda: {"p": 0.1, "r": 0.01})
    tick: float = 1.0
    duration: float = 60.0
    polling_interval: float = 5.0
    recompute_interval: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.tick <= 0:
            raise ConfigError("tick must be positive")
        if self.duration < self.tick:
            raise ConfigError("duration must be at least one tick")
        if self.workload.get("kind") not in ("random", "trace", "synthetic"):
            raise ConfigError(f"unknown workload {self.workload!r}")

    @classmethod
    def from_dict(cls, data):
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return asdict(self)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def write_manifest(path, config, extra=None):
    data = {"config": config.to_dict(), "config_sha256": config.digest(), "seed": config.seed}
    if extra:
        data.update(extra)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def csv_text(header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    return "\n".join(lines) + "\n"


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.6g}"
    return str(x)


def build_topology(config):
    return parse_topology_spec(config.topology, config.seed)


def workload_events(config, topology):
    """Trace events for trace/synthetic workloads."""
    w = config.workload
    if w["kind"] == "trace":
        with open(w["path"]) as fh:
            return parse_trace(fh.read(), topology)
    if w["kind"] == "synthetic":
        profile = get_profile(w.get("profile", "uni1-churn"))
        on_link = w.get("on_link", profile.kind == "udp" or profile.emit_bytes)
        return generate_events(profile, config.duration, w.get("seed", config.seed),
                               None if on_link else topology)
    raise ConfigError("random workloads have no event stream")


class Clock:
    """Minimal discrete-event queue: pops ``(time, seq, item)`` in order."""

    def __init__(self):
        self._q = []
        self._seq = 0

    def push(self, time, item):
        heapq.heappush(self._q, (time, self._seq, item))
        self._seq += 1

    def __iter__(self):
        while self._q:
            yield heapq.heappop(self._q)


def _tick_times(duration, tick, start=None):
    start = tick if start is None else start
    n = int(np.floor((duration - start) / tick + 1e-9)) + 1
    return [start + k * tick for k in range(max(0, n))]


def _replay(events, ticks):
    """Yield ``("event", ev)`` and ``("tick", t)`` in simulated time order."""
    clock = Clock()
    for ev in events:
        clock.push(ev.time, ("event", ev))
    for t in ticks:
        clock.push(t + 1e-9, ("tick", t))
    for _, _, item in clock:
        yield item


# --- MCPS -----------------------------------------------------------------

def snapshot_costs(flows, cost_model, seed=0):
    """Greedy scheme cost and both per-flow baselines for one snapshot."""
    if not flows:
        return {"greedy": 0, "random": 0, "mincost": 0, "poll_all": 0, "poll_single": 0,
                "savings_random": 0.0, "savings_mincost": 0.0}
    scheme = mcps.solve(flows, cost_model)
    rnd = mcps.per_flow_baseline(flows, cost_model, "random", seed)
    mc = mcps.per_flow_baseline(flows, cost_model, "mincost")
    return {
        "greedy": scheme.total_cost,
        "random": rnd,
        "mincost": mc,
        "poll_all": len(scheme.poll_all),
        "poll_single": len(scheme.poll_single),
        "savings_random": mcps.scheme_savings(scheme, rnd),
        "savings_mincost": mcps.scheme_savings(scheme, mc),
    }


MCPS_HEADER = ["time", "active_flows", "greedy_cost", "random_per_flow", "min_per_flow",
               "poll_all", "poll_single", "savings_random", "savings_min"]


def _mcps_row(t, flows, cm, seed):
    c = snapshot_costs(flows, cm, seed)
    return [t, len(flows), c["greedy"], c["random"], c["mincost"], c["poll_all"],
            c["poll_single"], c["savings_random"], c["savings_mincost"]]


def run_mcps_experiment(config, topology=None, events=None):
    """Scheme and baseline costs at every polling tick."""
    topology = topology or build_topology(config)
    cm = CostModel(topology, parse_mode(config.mode))
    w = config.workload
    if w["kind"] == "random":
        flows = generate_random_flows(topology, int(w["m"]), w.get("seed", config.seed))
        return [_mcps_row(0.0, flows, cm, config.seed)]
    if events is None:
        events = workload_events(config, topology)
    tracker = FlowStateTracker(topology.n)
    rows = []
    ticks = _tick_times(config.duration, config.polling_interval, start=0.0)
    for kind, item in _replay(events, ticks):
        if kind == "event":
            tracker.apply_event(item)
        else:
            rows.append(_mcps_row(item, tracker.snapshot(), cm, config.seed + len(rows)))
    return rows


def cost_sweep(topology, mode, flow_counts, seed=0):
    """Greedy vs per-flow costs as the number of random flows grows."""
    cm = CostModel(topology, mode)
    rows = []
    for m in flow_counts:
        flows = generate_random_flows(topology, m, seed)
        c = snapshot_costs(flows, cm, seed)
        rows.append({"m": m, **c})
    return rows


def controller_placement(topology, t_max, seed=0):
    """Nested controller attachments: the first ``t`` of one seeded permutation."""
    order = np.random.default_rng(seed).permutation(topology.n)
    return [int(v) for v in order[:t_max]]


def controller_sweep(topology, m, t_max=5, seed=0, flows=None):
    """Greedy cost as controllers are added one at a time."""
    flows = flows if flows is not None else generate_random_flows(topology, m, seed)
    attach = controller_placement(topology, t_max, seed)
    rows = []
    for t in range(1, t_max + 1):
        cm = CostModel(topology, MultiController(tuple(attach[:t])))
        c = snapshot_costs(flows, cm, seed)
        rows.append({"controllers": t, "attachments": attach[:t], **c})
    return rows


# --- dynamics --------------------------------------------------------------

DYNAMICS_HEADER = ["time", "active_flows", "per_flow_cost", "recompute_cost",
                   "dapr_fixed_cost", "dapr_ari_cost", "fixed_reconstructed", "ari_reconstructed"]


@dataclass
class DynamicsResult:
    rows: list
    reconstructions: dict
    coverage_violations: int
    bookkeeping_mismatches: int
    reports: dict = field(default_factory=dict)

    def series(self, name):
        col = DYNAMICS_HEADER.index(name)
        return np.array([r[col] for r in self.rows], dtype=float)

    def mean_cost(self, name):
        return float(self.series(name).mean())


DAPR_REPORT_HEADER = ["time", "active_flows", "scheme_cost", "poll_all_count",
                      "poll_single_count", "reconstructed"]


def run_dynamics_experiment(config, topology=None, events=None):
    """Per-tick costs of per-flow polling, periodic recompute and two DAPR variants.

    Both DAPR schemes are built once at ``t = 0`` from the opening population;
    that build is not counted as a reconstruction.
    """
    topology = topology or build_topology(config)
    cm = CostModel(topology, parse_mode(config.mode))
    if events is None:
        events = workload_events(config, topology)
    policy = parse_policy(config.policy)
    if not isinstance(policy, ARI):
        raise ConfigError("dynamics policy must be ari:<threshold>")
    variants = {"fixed": DynamicScheme(cm, Fixed(config.fixed_interval)),
                "ari": DynamicScheme(cm, policy)}
    tracker = FlowStateTracker(topology.n, topology)
    rows = []
    reports = {name: [] for name in variants}
    violations = mismatches = 0
    started = False
    recompute_cost = 0
    last_recompute = None
    for kind, item in _replay(events, _tick_times(config.duration, config.tick, start=0.0)):
        if kind == "event":
            note = tracker.apply_event(item)
            if note is None or not started:
                continue
            for st in variants.values():
                if note.kind == ARR:
                    st.on_arrival(note.flow)
                else:
                    st.on_expiry(note.flow)
            continue
        t = item
        snap = tracker.snapshot()
        if not started:
            for st in variants.values():
                st.reconstruct(snap, t, count=False)
            started = True
            fired = {name: False for name in variants}
        else:
            fired = {name: st.maybe_reconstruct(tracker, t) for name, st in variants.items()}
        if last_recompute is None or t - last_recompute >= config.recompute_interval - 1e-9:
            recompute_cost = mcps.solve(snap, cm).total_cost if snap else 0
            last_recompute = t
        per_flow = mcps.per_flow_baseline(snap, cm, "mincost")
        for name, st in variants.items():
            if not mcps.covers(st.scheme, snap):
                violations += 1
            if st.total_cost != mcps.scheme_cost(st.scheme, snap, cm):
                mismatches += 1
            reports[name].append([t, len(snap), st.total_cost, len(st.scheme.poll_all),
                                  len(st.scheme.poll_single), fired[name]])
        rows.append([t, len(snap), per_flow, recompute_cost, variants["fixed"].total_cost,
                     variants["ari"].total_cost, fired["fixed"], fired["ari"]])
    counts = {name: st.reconstruction_count for name, st in variants.items()}
    return DynamicsResult(rows, counts, violations, mismatches, reports)


# --- adaptive polling ------------------------------------------------------

@dataclass
class FlowTrace:
    flow: object
    series: afps.ByteSeries
    arrival: float
    expiry: float | None


def flow_traces(events):
    """Group trace events into per-flow byte series."""
    info = {}
    times = {}
    incs = {}
    for ev in events:
        if ev.kind == ARR:
            info[ev.flow_id] = [ev.flow, ev.time, None]
            times[ev.flow_id] = []
            incs[ev.flow_id] = []
        elif ev.kind == BYT:
            times[ev.flow_id].append(ev.time)
            incs[ev.flow_id].append(ev.bytes)
        elif ev.kind == EXP:
            info[ev.flow_id][2] = ev.time
    return [FlowTrace(f, afps.ByteSeries(times[fid], incs[fid]), a, e)
            for fid, (f, a, e) in info.items()]


@dataclass
class AfpsResult:
    ticks: np.ndarray
    truth: np.ndarray
    measured: dict
    polls: dict
    errors: dict
    logs: dict
    flow_ids: list = field(default_factory=list)

    def saving(self, alg):
        return 1 - self.polls[alg] / self.polls[afps.PERIODIC]

    def error_ratio(self, alg):
        base = self.errors[afps.PERIODIC]
        return self.errors[alg] / base if base else float("inf")


def run_afps_experiment(config, events=None, algorithms=afps.ALGORITHMS):
    """Run every sampling algorithm on identical flows and score it against the truth."""
    if events is None:
        events = workload_events(config, None)
    traces = flow_traces(events)
    ticks = np.array(_tick_times(config.duration, config.tick))
    truth = afps.true_utilization([ft.series for ft in traces], ticks, config.tick)
    measured, polls, errors, logs = {}, {}, {}, {}
    base = dict(config.sampler)
    for alg in algorithms:
        cfg = afps.SamplerConfig(**{**base, "algorithm": alg})
        alg_logs = [afps.schedule(ft.series, cfg, ft.arrival, ft.expiry, horizon=config.duration)
                    for ft in traces]
        logs[alg] = alg_logs
        measured[alg] = afps.utilization_series(alg_logs, ticks, config.tick)
        polls[alg] = sum(afps.poll_count(lg) for lg in alg_logs)
        errors[alg] = afps.measurement_error(truth, measured[alg])
    return AfpsResult(ticks, truth, measured, polls, errors, logs, [ft.flow.id for ft in traces])


AFPS_SAMPLE_HEADER = ["flow_id", "time", "counter", "interval", "algorithm", "removed"]


def afps_sample_rows(result, flow_ids):
    rows = []
    for alg, alg_logs in result.logs.items():
        for fid, log in zip(flow_ids, alg_logs):
            rows.extend([fid, s.time, s.counter, s.interval, alg, s.removed] for s in log)
    return rows


# --- accuracy --------------------------------------------------------------

ACCURACY_HEADER = ["r", "p", "afr", "tm_exact", "tm_mean_relative"]


def true_packet_counts(flows, seed=0, low=100, high=100_000):
    rng = np.random.default_rng(seed)
    counts = rng.integers(low, high, size=len(flows))
    return {f.id: int(c) for f, c in zip(flows, counts.tolist())}


def accuracy_point(scheme, flows, counts, model, real_tm=None):
    measured = loss.measure_flows(scheme, flows, counts, model)
    real_tm = real_tm or loss.traffic_matrix(counts, flows)
    exact, rel = loss.tm_accuracy(loss.traffic_matrix(measured, flows), real_tm)
    return loss.afr(measured, counts), exact, rel


def run_accuracy_experiment(config, topology=None, r_grid=None, p_grid=None):
    """AFR and TM accuracy over a packet-loss-rate sweep and a loss-switch sweep."""
    topology = topology or build_topology(config)
    cm = CostModel(topology, parse_mode(config.mode))
    w = config.workload
    flows = generate_random_flows(topology, int(w.get("m", 20000)), w.get("seed", config.seed))
    counts = true_packet_counts(flows, config.seed)
    scheme = mcps.solve(flows, cm)
    real_tm = loss.traffic_matrix(counts, flows)
    p0 = float(config.loss.get("p", 0.1))
    r0 = float(config.loss.get("r", 0.01))
    r_grid = r_grid if r_grid is not None else [0.0, 0.05, 0.1, 0.15, 0.2]
    p_grid = p_grid if p_grid is not None else [0.0, 0.05, 0.1, 0.15, 0.2]
    rows = []
    base = loss.assign_loss_switches(topology, p0, config.seed)
    for r in r_grid:
        rows.append([r, p0, *accuracy_point(scheme, flows, counts, base.with_rate(r), real_tm)])
    for p in p_grid:
        model = loss.assign_loss_switches(topology, p, config.seed, r0)
        rows.append([r0, p, *accuracy_point(scheme, flows, counts, model, real_tm)])
    return rows
