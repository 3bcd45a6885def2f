"""Maximum-coverage polling: weighted set cover over poll-all and poll-single queries."""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field

import numpy as np

POLL_ALL = "all"
POLL_SINGLE = "single"

DEFAULT_OPTIMAL_CAP = 24


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class CandidateSet:
    kind: str
    key: object  # switch id for poll-all, flow id for poll-single
    covered: tuple
    weight: int
    switch: int
    controller: int = 0


@dataclass
class PollingScheme:
    poll_all: list = field(default_factory=list)
    poll_single: dict = field(default_factory=dict)
    total_cost: int = 0

    @property
    def query_count(self):
        return len(self.poll_all) + len(self.poll_single)

    def poll_all_switches(self):
        return [s for s, _ in self.poll_all]

    def to_dict(self):
        return {
            "poll_all": [{"switch": s, "controller": c} for s, c in self.poll_all],
            "poll_single": {fid: {"switch": s, "controller": c}
                            for fid, (s, c) in self.poll_single.items()},
            "total_cost": int(self.total_cost),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        return cls(
            [(int(e["switch"]), int(e["controller"])) for e in data["poll_all"]],
            {fid: (int(e["switch"]), int(e["controller"])) for fid, e in data["poll_single"].items()},
            int(data["total_cost"]),
        )


def construct_candidates(flows, cost_model):
    """Build one poll-all set per switch and one poll-single set per flow.

    Poll-all weights use the switch's full flow count; poll-single weights are
    the flow's cheapest single-poll cost over its path (and controllers).
    """
    n = cost_model.n
    members = [[] for _ in range(n)]
    singles = []
    for f in flows:
        for v in f.path:
            members[v].append(f.id)
        q, sw, ctrl = cost_model.min_single_cost(f.path)
        singles.append(CandidateSet(POLL_SINGLE, f.id, (f.id,), q, sw, ctrl))
    cands = []
    for v in range(n):
        w, ctrl = cost_model.poll_all_cost(v, len(members[v]))
        cands.append(CandidateSet(POLL_ALL, v, tuple(members[v]), w, v, ctrl))
    cands.extend(singles)
    return cands


def _scheme_from(chosen, candidates):
    """Assemble a redundancy-free scheme from selected candidate indices."""
    covered_by_all = set()
    poll_all = []
    total = 0
    for i in chosen:
        c = candidates[i]
        if c.kind == POLL_ALL:
            poll_all.append((c.switch, c.controller))
            covered_by_all.update(c.covered)
            total += c.weight
    poll_single = {}
    for i in chosen:
        c = candidates[i]
        if c.kind == POLL_SINGLE and c.key not in covered_by_all:
            poll_single[c.key] = (c.switch, c.controller)
            total += c.weight
    return PollingScheme(poll_all, poll_single, total)


def greedy_order(candidates):
    """Indices selected by the cost-effectiveness greedy, in selection order.

    Keys are ``(weight / newly covered, weight, poll-all first, switch, index)``.
    Keys only grow as flows get covered, so stale heap entries are
    re-keyed lazily when popped.
    """
    flow_pos = {}
    cand_flows = []
    for c in candidates:
        idxs = []
        for fid in c.covered:
            j = flow_pos.get(fid)
            if j is None:
                j = flow_pos[fid] = len(flow_pos)
            idxs.append(j)
        cand_flows.append(idxs)
    containing = [[] for _ in range(len(flow_pos))]
    for ci, idxs in enumerate(cand_flows):
        for j in idxs:
            containing[j].append(ci)
    uncovered = [len(idxs) for idxs in cand_flows]
    heap = []
    for ci, c in enumerate(candidates):
        u = uncovered[ci]
        if u:
            heap.append((c.weight / u, c.weight, c.kind != POLL_ALL, c.switch, ci, u))
    heapq.heapify(heap)
    covered = bytearray(len(flow_pos))
    remaining = len(flow_pos)
    chosen = []
    while remaining:
        ratio, w, rank, sw, ci, u_at_push = heapq.heappop(heap)
        u = uncovered[ci]
        if u != u_at_push:
            if u:
                heapq.heappush(heap, (w / u, w, rank, sw, ci, u))
            continue
        chosen.append(ci)
        for j in cand_flows[ci]:
            if not covered[j]:
                covered[j] = 1
                remaining -= 1
                for other in containing[j]:
                    uncovered[other] -= 1
    return chosen


def greedy_scheme(candidates):
    return _scheme_from(greedy_order(candidates), candidates)


def _subset_tables(masks, costs):
    """Coverage bitmask and cost for every subset of the given candidates."""
    k = len(masks)
    cover = np.zeros(1 << k, dtype=np.int64)
    cost = np.zeros(1 << k, dtype=np.int64)
    for i in range(k):
        half = 1 << i
        cover[half:2 * half] = cover[:half] | masks[i]
        cost[half:2 * half] = cost[:half] + costs[i]
    return cover, cost


def optimal_scheme(candidates, cap=DEFAULT_OPTIMAL_CAP):
    """Exhaustive minimum-cost cover.

    Every subset is scored (split into a low and a high half so the tables
    stay small). Among equal-cost optima the smallest subset bitmask wins,
    bit ``i`` standing for ``candidates[i]``.
    """
    k = len(candidates)
    if k > cap:
        raise InstanceTooLarge(f"{k} candidates exceed the exhaustive-search cap of {cap}")
    flow_bit = {}
    for c in candidates:
        for fid in c.covered:
            flow_bit.setdefault(fid, len(flow_bit))
    if len(flow_bit) > 62:
        raise InstanceTooLarge("more than 62 flows")
    full = (1 << len(flow_bit)) - 1
    masks = [sum(1 << flow_bit[f] for f in c.covered) for c in candidates]
    costs = [c.weight for c in candidates]
    lo = min(k, 12)
    lo_cover, lo_cost = _subset_tables(masks[:lo], costs[:lo])
    hi_cover, hi_cost = _subset_tables(masks[lo:], costs[lo:])
    best_cost = None
    best_mask = None
    for j in range(hi_cover.size):
        feasible = (lo_cover | hi_cover[j]) == full
        if not feasible.any():
            continue
        total = np.where(feasible, lo_cost + hi_cost[j], np.iinfo(np.int64).max)
        i = int(np.argmin(total))
        if best_cost is None or total[i] < best_cost:
            best_cost = int(total[i])
            best_mask = (j << lo) | i
    chosen = [i for i in range(k) if best_mask >> i & 1]
    return _scheme_from(chosen, candidates)


def harmonic(p):
    return sum(1.0 / i for i in range(1, p + 1))


def approximation_bound(candidates):
    """H(p) with ``p`` the largest candidate size."""
    return harmonic(max((len(c.covered) for c in candidates), default=0))


def single_cost_at(cost_model, switch, controller):
    return cost_model.constants.single_total * int(cost_model.hops[controller, switch])


def all_cost_at(cost_model, switch, controller, flow_count):
    c = cost_model.constants
    return (c.l_req + c.reply_len(flow_count)) * int(cost_model.hops[controller, switch])


def scheme_cost(scheme, flows, cost_model):
    """Cost of issuing ``scheme`` now against the given active flows."""
    counts = np.zeros(cost_model.n, dtype=np.int64)
    for f in flows:
        counts[list(f.path)] += 1
    total = sum(all_cost_at(cost_model, s, c, int(counts[s])) for s, c in scheme.poll_all)
    total += sum(single_cost_at(cost_model, s, c) for s, c in scheme.poll_single.values())
    return total


def covers(scheme, flows):
    """True iff every flow passes a poll-all switch or has a single poll."""
    polled = {s for s, _ in scheme.poll_all}
    return all(f.id in scheme.poll_single or not polled.isdisjoint(f.path) for f in flows)


def assignment_cost(assignment, flows, cost_model):
    """Per-flow querying cost for an explicit ``flow id -> switch`` map.

    Each flow uses the controller closest to its assigned switch.
    """
    total = 0
    for f in flows:
        v = assignment[f.id]
        if v not in f.path:
            raise ValueError(f"switch {v} is not on the path of flow {f.id}")
        total += cost_model.poll_single_cost(v)[0]
    return total


def per_flow_baseline(flows, cost_model, strategy="mincost", seed=0):
    """Total cost of polling every flow individually.

    ``random`` picks a uniform switch on each path (and a uniform controller
    when several exist); ``mincost`` uses the cheapest switch and controller.
    """
    if strategy == "mincost":
        return sum(cost_model.min_single_cost(f.path)[0] for f in flows)
    if strategy == "random":
        rng = np.random.default_rng(seed)
        m = len(flows)
        lens = np.fromiter((len(f.path) for f in flows), dtype=np.int64, count=m)
        pick = (rng.random(m) * lens).astype(np.int64)
        t = cost_model.hops.shape[0]
        ctrl = rng.integers(0, t, size=m)
        single = cost_model.constants.single_total
        hops = cost_model.hops
        return int(sum(single * int(hops[c, f.path[k]])
                       for f, k, c in zip(flows, pick.tolist(), ctrl.tolist())))
    raise ValueError(f"unknown baseline strategy {strategy!r}")


def scheme_savings(scheme_cost_value, baseline_cost):
    if isinstance(scheme_cost_value, PollingScheme):
        scheme_cost_value = scheme_cost_value.total_cost
    if baseline_cost <= 0:
        raise ValueError("baseline cost must be positive")
    return (baseline_cost - scheme_cost_value) / baseline_cost


def solve(flows, cost_model, optimal=False, cap=DEFAULT_OPTIMAL_CAP):
    cands = construct_candidates(flows, cost_model)
    return optimal_scheme(cands, cap) if optimal else greedy_scheme(cands)
