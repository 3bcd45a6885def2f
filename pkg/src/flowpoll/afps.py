"""Per-flow adaptive polling: interval tuning, sample scheduling and link utilization."""

from __future__ import annotations

import math
from bisect import bisect_left
from collections import deque
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

PERIODIC, PT, EWMAT, SWT = "periodic", "pt", "ewmat", "swt"
ALGORITHMS = (PERIODIC, PT, EWMAT, SWT)


@dataclass(frozen=True)
class SamplerConfig:
    tau_min: float = 0.5
    tau_max: float = 5.0
    initial_interval: float = 1.0
    v: float | None = None  # bytes/s; None -> learnt from the first non-zero reading pair
    alpha: float = 0.5
    algorithm: str = PT
    swt_initial_ws: int = 3
    swt_shrink: str = "min"  # how the window size shrinks on a spike: min(3, .) or max(3, .)

    def __post_init__(self):
        if not 0 < self.tau_min <= self.initial_interval <= self.tau_max:
            raise ValueError("need 0 < tau_min <= initial_interval <= tau_max")
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")
        if self.v is not None and self.v <= 0:
            raise ValueError("v must be positive")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.swt_shrink not in ("min", "max"):
            raise ValueError("swt_shrink must be 'min' or 'max'")

    def clamp(self, tau):
        return min(self.tau_max, max(self.tau_min, tau))


class Sample(NamedTuple):
    time: float
    counter: int
    interval: float
    removed: bool = False


@dataclass
class SamplerState:
    prev: tuple | None = None  # (time, counter) of the reading before last
    last: tuple | None = None
    tau: float = 1.0
    ewma: float = 1.0
    v: float | None = None
    ws: int = 3
    window: deque = field(default_factory=deque)
    sample_log: list = field(default_factory=list)

    @classmethod
    def start(cls, config, arrival=0.0):
        """Fresh state holding the implicit zero reading at flow arrival."""
        return cls(prev=None, last=(arrival, 0), tau=config.initial_interval,
                   ewma=config.initial_interval, v=config.v, ws=config.swt_initial_ws)

    def push_reading(self, time, counter):
        self.prev, self.last = self.last, (time, counter)


def _deltas(state):
    (t0, c0), (t1, c1) = state.prev, state.last
    return t1 - t0, c1 - c0


def pt_next_interval(state, config):
    """Interval scaled by the ratio of the reference rate to the observed rate.

    A zero byte delta (idle flow) jumps straight to ``tau_max``.
    """
    dt, dc = _deltas(state)
    if dc <= 0:
        return config.tau_max
    v = state.v if state.v is not None else dc / dt
    return config.clamp(state.tau * v * dt / dc)


def ewma_blend(tau_pt, prev_ewma, alpha):
    return alpha * tau_pt + (1 - alpha) * prev_ewma


def ewmat_next_interval(state, config):
    tau_pt = pt_next_interval(state, config)
    return config.clamp(ewma_blend(tau_pt, state.ewma, config.alpha))


def window_stats(window):
    """Population mean and standard deviation; ``None`` for an empty window."""
    if not window:
        return None
    arr = np.fromiter(window, dtype=float, count=len(window))
    return float(arr.mean()), float(arr.std())


def swt_next_interval(state, config):
    """Sliding-window spike test with AIMD on the window size.

    Mutates ``state.window`` and ``state.ws``. A spike halves the interval and
    shrinks the window size without recording the spike; otherwise the
    interval doubles, the window grows by one and takes the new delta.
    """
    _, var = _deltas(state)
    stats = window_stats(state.window)
    spike = stats is not None and var > stats[0] + 2 * stats[1]
    if spike:
        tau = max(config.tau_min, state.tau / 2)
        half = math.ceil(state.ws / 2)
        state.ws = min(3, half) if config.swt_shrink == "min" else max(3, half)
    else:
        tau = min(config.tau_max, state.tau * 2)
        state.ws += 1
        state.window.append(var)
    state.ws = max(1, state.ws)
    while len(state.window) > state.ws:
        state.window.popleft()
    return tau


def next_interval(state, config):
    alg = config.algorithm
    if alg == PERIODIC:
        return config.initial_interval
    if alg == PT:
        return pt_next_interval(state, config)
    if alg == EWMAT:
        return ewmat_next_interval(state, config)
    return swt_next_interval(state, config)


def observe(state, config, time, counter):
    """Record a poll result and return the interval until the next poll."""
    gap = time - state.last[0]
    state.push_reading(time, counter)
    state.sample_log.append(Sample(time, counter, gap))
    if state.v is None and counter > state.prev[1]:
        state.v = (counter - state.prev[1]) / gap
    tau = next_interval(state, config)
    state.tau = tau
    state.ewma = tau
    return tau


class ByteSeries:
    """Cumulative byte counter of one flow built from timed increments.

    ``counter(t)`` counts bytes sent strictly before ``t``.
    """

    def __init__(self, times=(), increments=()):
        self.times = list(times)
        self.cum = [0]
        for b in increments:
            self.cum.append(self.cum[-1] + int(b))

    @property
    def total(self):
        return self.cum[-1]

    def counter(self, t):
        return self.cum[bisect_left(self.times, t)]

    def counters(self, ts):
        idx = np.searchsorted(np.asarray(self.times, dtype=float), ts, side="left")
        return np.asarray(self.cum, dtype=np.int64)[idx]


def schedule(series, config, arrival, expiry=None, horizon=None):
    """Poll one flow from ``arrival`` until it expires (or through ``horizon``).

    The first poll happens one initial interval after arrival. When the flow
    expires its final counter is appended as a removal record, which costs
    no polling message.
    """
    state = SamplerState.start(config, arrival)
    end = expiry if expiry is not None else horizon
    if end is None:
        raise ValueError("need an expiry or a horizon")
    t = arrival + config.initial_interval
    # a flow still alive at the horizon is polled at the horizon itself
    last_ok = (lambda x: x < end) if expiry is not None else (lambda x: x <= end + 1e-9)
    while last_ok(t):
        tau = observe(state, config, t, series.counter(t))
        t += tau
    if expiry is not None:
        state.sample_log.append(Sample(expiry, series.counter(expiry), expiry - state.last[0], True))
    return state.sample_log


def poll_count(sample_log):
    return sum(1 for s in sample_log if not s.removed)


def _counter_at(log_times, log_counters, t):
    i = np.searchsorted(log_times, t, side="right") - 1
    return np.where(i >= 0, log_counters[np.maximum(i, 0)], 0)


def link_utilization(sample_logs, t, tau=1.0):
    """Bytes over ``[t - tau, t)`` reconstructed from the latest readings.

    Each flow contributes its latest counter at or before ``t`` minus its
    latest counter at or before ``t - tau``; a flow without a reading yet
    counts from zero.
    """
    total = 0
    for log in sample_logs:
        if not log:
            continue
        times = np.fromiter((s.time for s in log), dtype=float, count=len(log))
        counters = np.fromiter((s.counter for s in log), dtype=np.int64, count=len(log))
        total += int(_counter_at(times, counters, t) - _counter_at(times, counters, t - tau))
    return total


def utilization_series(sample_logs, ticks, tau=1.0):
    """Vectorised ``link_utilization`` over many window end points."""
    ticks = np.asarray(ticks, dtype=float)
    out = np.zeros(ticks.size, dtype=np.int64)
    for log in sample_logs:
        if not log:
            continue
        times = np.fromiter((s.time for s in log), dtype=float, count=len(log))
        counters = np.fromiter((s.counter for s in log), dtype=np.int64, count=len(log))
        out += _counter_at(times, counters, ticks) - _counter_at(times, counters, ticks - tau)
    return out


def true_utilization(series_list, ticks, tau=1.0):
    ticks = np.asarray(ticks, dtype=float)
    out = np.zeros(ticks.size, dtype=np.int64)
    for s in series_list:
        out += s.counters(ticks) - s.counters(ticks - tau)
    return out


def measurement_error(actual, measured):
    """``sqrt(sum((x - x_hat)^2)) / N``."""
    x = np.asarray(actual, dtype=float)
    xh = np.asarray(measured, dtype=float)
    if x.shape != xh.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {xh.shape}")
    if x.size == 0:
        raise ValueError("empty series")
    return float(np.sqrt(np.sum((x - xh) ** 2)) / x.size)
