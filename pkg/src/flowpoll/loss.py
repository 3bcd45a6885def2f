"""Packet-loss model and the accuracy metrics built on it.

Lossy switches drop each transiting packet with probability ``r`` before
it is counted, so a lossy switch's own counter is already attenuated.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LossModel:
    p: float
    r: float
    loss_switches: frozenset
    seed: int = 0

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValueError("loss switch ratio must lie in [0, 1]")
        if not 0 <= self.r < 1:
            raise ValueError("packet loss rate must lie in [0, 1)")

    def with_rate(self, r):
        return LossModel(self.p, r, self.loss_switches, self.seed)


def assign_loss_switches(topology, p, seed=0, r=0.0):
    """Pick ``round(p * n)`` loss switches uniformly without replacement.

    The same seed always draws from the same permutation, so a larger ``p``
    gives a superset of the switches chosen for a smaller one.
    """
    if not 0 <= p <= 1:
        raise ValueError("loss switch ratio must lie in [0, 1]")
    n = topology.n
    k = int(round(p * n))
    order = np.random.default_rng(seed).permutation(n)
    return LossModel(p, r, frozenset(order[:k].tolist()), seed)


def upstream_losses(path, loss_switches):
    """Number of lossy switches at or before each path position."""
    out = []
    u = 0
    for v in path:
        if v in loss_switches:
            u += 1
        out.append(u)
    return out


def counters_along_path(path, true_count, model):
    """Expected counter at each switch of ``path``."""
    keep = 1.0 - model.r
    return [true_count * keep ** u for u in upstream_losses(path, model.loss_switches)]


def counters_along_path_mc(path, true_count, model, rng):
    """One Monte-Carlo draw: every packet survives each lossy hop with ``1 - r``."""
    out = []
    c = int(true_count)
    for v in path:
        if v in model.loss_switches and c:
            c = int(rng.binomial(c, 1.0 - model.r))
        out.append(c)
    return out


def expected_relative_undercount(length, p, r):
    """Closed-form expected ``1 - c / c*`` for a flow crossing ``length`` switches.

    ``length * p`` lossy switches are assumed, with the polled counter seeing
    between 0 and all of them with equal probability. The exponent may be
    fractional.
    """
    if length < 1:
        raise ValueError("path length must be at least 1")
    if r == 0:
        return 0.0
    lp = length * p
    log_keep = math.log1p(-r)
    # expm1 keeps the denominator accurate as r -> 0
    ratio = (lp + 1) * r * math.exp(lp * log_keep) / -math.expm1((lp + 1) * log_keep)
    return max(0.0, 1.0 - ratio)


def afr(measured, real):
    """Fraction of flows whose measured counter equals the real one."""
    if measured.keys() != real.keys():
        raise KeyError("measured and real flow sets differ")
    if not real:
        return 1.0
    return sum(measured[k] == real[k] for k in real) / len(real)


def traffic_matrix(counts, flows):
    """Sum flow counters per (source host, destination host) pair."""
    tm = defaultdict(float)
    for f in flows:
        tm[(f.src, f.dst)] += counts[f.id]
    return dict(tm)


def tm_accuracy(measured, real, threshold=1e-6):
    """``(exact, mean_relative)`` accuracy of a measured traffic matrix.

    ``exact`` is the share of elements whose relative error is below
    ``threshold``; ``mean_relative`` averages ``min/max`` over elements.
    """
    if measured.keys() != real.keys():
        raise KeyError("traffic matrices cover different host pairs")
    if not real:
        return 1.0, 1.0
    exact = 0
    rel = 0.0
    for k, x in real.items():
        y = measured[k]
        hi = max(x, y)
        if hi == 0 or abs(x - y) / hi < threshold:
            exact += 1
        rel += 1.0 if hi == 0 else min(x, y) / hi
    return exact / len(real), rel / len(real)


def reporting_switches(scheme, flow):
    """Switches whose replies include ``flow`` under ``scheme``."""
    polled = [s for s, _ in scheme.poll_all if s in flow.path]
    single = scheme.poll_single.get(flow.id)
    if single is not None:
        polled.append(single[0])
    return polled


def measure_flows(scheme, flows, true_counts, model):
    """Counter the collector ends up with for each flow.

    A flow reported by several switches keeps the largest reading, since
    counters only shrink along the path.
    """
    out = {}
    for f in flows:
        per_switch = dict(zip(f.path, counters_along_path(f.path, true_counts[f.id], model)))
        readings = [per_switch[v] for v in reporting_switches(scheme, f)]
        if not readings:
            raise ValueError(f"flow {f.id} is not covered by the scheme")
        out[f.id] = max(readings)
    return out
