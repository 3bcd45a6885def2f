"""Seeded synthetic flow traces with data-center-like churn and byte processes.

Arrivals follow a piecewise-linear intensity; the total count is fixed at
the intensity's integral and spread over time multinomially. Each flow has an
active period during which it emits byte increments every ``resolution``
seconds, then sits idle until the soft timeout removes it. History before
``t = 0`` is simulated for ``warmup`` seconds so the trace opens with a
realistic population already in flight; those flows appear as arrivals at
``t = 0``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from .flows import ARR, BYT, EXP, Flow, TraceEvent, write_trace
from .topology import shortest_path


@dataclass(frozen=True)
class SyntheticProfile:
    name: str
    kind: str = "tcp"  # "tcp": many short flows; "udp": few long, bursty flows
    rate_knots: tuple = ((0.0, 40.0),)  # (time, arrivals per second)
    warmup: float = 30.0
    active_median: float = 0.3  # seconds, lognormal
    active_sigma: float = 1.0
    elephant_fraction: float = 0.05
    elephant_duration: tuple = (20.0, 90.0)
    mouse_rate_median: float = 20_000.0  # bytes/s
    elephant_rate_median: float = 500_000.0
    rate_sigma: float = 0.8
    burstiness: float = 0.3  # per-chunk lognormal noise
    off_probability: float = 0.0  # chance a chunk is silent
    off_run: float = 1.0  # mean OFF-run length in seconds
    idle_timeout: float = 10.0
    resolution: float = 0.1
    emit_bytes: bool = True
    target_flows: int | None = None
    target_peak: int | None = None

    def to_dict(self):
        return asdict(self)


# Churn trace for the dynamics experiments: concurrency swings between
# roughly 250 and 1750 flows across the minute.
UNI1_CHURN = SyntheticProfile(
    name="uni1-churn",
    rate_knots=((0.0, 18.0), (15.0, 18.0), (25.0, 139.0), (40.0, 139.0), (50.0, 7.0), (60.0, 7.0)),
    warmup=40.0,
    active_median=1.0,
    active_sigma=1.2,
    elephant_fraction=0.05,
    elephant_duration=(30.0, 120.0),
    emit_bytes=False,
    target_peak=1746,
)

# TCP traffic on one link for the adaptive polling experiments.
TCP_LIKE = SyntheticProfile(
    name="tcp",
    kind="tcp",
    rate_knots=((0.0, 38.0),),
    warmup=30.0,
    active_median=0.3,
    active_sigma=1.0,
    elephant_fraction=0.02,
    elephant_duration=(5.0, 40.0),
    mouse_rate_median=300_000.0,
    elephant_rate_median=20_000.0,
    rate_sigma=0.7,
    burstiness=0.3,
    target_flows=2668,
)

# Long-lived, sharply fluctuating UDP traffic on one link.
UDP_LIKE = SyntheticProfile(
    name="udp",
    kind="udp",
    rate_knots=((0.0, 1.02),),
    warmup=60.0,
    active_median=40.0,
    active_sigma=0.5,
    elephant_fraction=0.0,
    mouse_rate_median=100_000.0,
    rate_sigma=0.8,
    burstiness=0.6,
    off_probability=0.5,
    off_run=5.0,
    idle_timeout=10.0,
    target_flows=111,
)

# Flow churn behind the Abilene emulation (peak concurrency 1297, 5 s polling).
ABILENE_CHURN = replace(
    UNI1_CHURN,
    name="abilene",
    rate_knots=((0.0, 45.0), (20.0, 104.0), (40.0, 75.0), (60.0, 45.0)),
    target_peak=1297,
)

PROFILES = {p.name: p for p in (UNI1_CHURN, TCP_LIKE, UDP_LIKE, ABILENE_CHURN)}


def get_profile(name):
    try:
        return PROFILES[name]
    except KeyError:
        raise ValueError(f"unknown synthetic profile {name!r}; choose from {sorted(PROFILES)}") from None


def _intensity(knots, t):
    ts = [k[0] for k in knots]
    rs = [k[1] for k in knots]
    return np.interp(t, ts, rs)


def _arrival_times(profile, duration, rng):
    dt = 0.1
    edges = np.arange(-profile.warmup, duration, dt)
    lam = _intensity(profile.rate_knots, edges + dt / 2) * dt
    # total fixed at its expectation so flow counts track the profile target
    total = int(round(lam.sum()))
    counts = rng.multinomial(total, lam / lam.sum()) if total else np.zeros(lam.size, dtype=int)
    times = np.repeat(edges, counts) + rng.random(counts.sum()) * dt
    return np.sort(times)


def _chunk_mask(n_chunks, profile, rng):
    """ON/OFF mask over chunks from a two-state Markov chain."""
    if profile.off_probability <= 0 or n_chunks <= 1:
        return np.ones(n_chunks, dtype=bool)
    leave_off = min(1.0, profile.resolution / profile.off_run)
    # stationary OFF share equals off_probability
    enter_off = leave_off * profile.off_probability / (1 - profile.off_probability)
    u = rng.random(n_chunks)
    mask = np.ones(n_chunks, dtype=bool)
    on = True
    for k in range(n_chunks):
        if on and u[k] < enter_off:
            on = False
        elif not on and u[k] < leave_off:
            on = True
        mask[k] = on
    mask[0] = True
    return mask


def generate_events(profile, duration, seed=0, topology=None, link_path=(0, 1)):
    """Trace events for ``duration`` seconds.

    With a topology, each flow joins two distinct uniformly chosen switches
    over the BFS path; otherwise every flow crosses ``link_path``.
    """
    if duration <= 0:
        return []
    rng = np.random.default_rng(seed)
    arrivals = _arrival_times(profile, duration, rng)
    res = profile.resolution
    records = []  # (time, rank, seq, event)
    fid = 0
    for a in arrivals.tolist():
        elephant = rng.random() < profile.elephant_fraction
        if elephant:
            d = rng.uniform(*profile.elephant_duration)
            rate = profile.elephant_rate_median * np.exp(profile.rate_sigma * rng.standard_normal())
        else:
            d = profile.active_median * np.exp(profile.active_sigma * rng.standard_normal())
            rate = profile.mouse_rate_median * np.exp(profile.rate_sigma * rng.standard_normal())
        n_chunks = max(1, int(np.ceil(d / res)))
        chunk_t = a + res * np.arange(n_chunks)
        noise = np.exp(profile.burstiness * rng.standard_normal(n_chunks))
        mask = _chunk_mask(n_chunks, profile, rng)
        chunk_b = np.floor(rate * res * noise * mask).astype(np.int64)
        last = float(chunk_t[-1])
        expiry = last + profile.idle_timeout
        if topology is not None:
            s = int(rng.integers(topology.n))
            t_ = int(rng.integers(topology.n - 1))
            t_ += t_ >= s
            src, dst, path = str(s), str(t_), tuple(shortest_path(topology, s, t_))
        else:
            src, dst, path = "0", "1", tuple(link_path)
        if expiry <= 0:
            continue
        start = max(0.0, a)
        arr_t = round(start, 6)
        exp_t = round(expiry, 6) if expiry < duration else None
        if exp_t is not None and exp_t <= arr_t:
            continue
        name = f"f{fid}"
        fid += 1
        flow = Flow(name, src, dst, path, arrival_time=arr_t, expiry_time=exp_t)
        records.append((arr_t, 0, len(records), TraceEvent(arr_t, ARR, name, flow)))
        if profile.emit_bytes:
            for t, b in zip(chunk_t.tolist(), chunk_b.tolist()):
                if t < 0 or t >= duration or b <= 0:
                    continue
                bt = round(t, 6)
                records.append((bt, 1, len(records), TraceEvent(bt, BYT, name, bytes=b)))
        if exp_t is not None:
            records.append((exp_t, 2, len(records), TraceEvent(exp_t, EXP, name)))
    records.sort(key=lambda r: (r[0], r[1], r[2]))
    return [r[3] for r in records]


def generate_synthetic_trace(profile, duration, seed=0, topology=None, path=None):
    """Trace CSV text for the profile; also written to ``path`` if given."""
    text = write_trace(generate_events(profile, duration, seed, topology))
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def summarize(events):
    """Flow count, peak and minimum concurrency (after t=0 arrivals), total bytes."""
    active = 0
    peak = 0
    flows = 0
    total = 0
    level = {}
    for ev in events:
        if ev.kind == ARR:
            active += 1
            flows += 1
        elif ev.kind == EXP:
            active -= 1
        else:
            total += ev.bytes
        level[ev.time] = active
        peak = max(peak, active)
    after_start = [v for t, v in level.items() if t > 0]
    low = min(after_start) if after_start else active
    return {"flows": flows, "peak": peak, "min": low, "bytes": total}
