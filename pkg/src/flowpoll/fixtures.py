"""The six-switch, six-flow worked example and the regression fixture runner.

Switch ``S<k>`` is id ``k-1``. The graph is a ring S1..S6 with a chord
S3-S6; hosts attach at H1:S1, H2:S3, H3:S4, H4:S6, H5:S5. Under BFS
routing this reproduces every reference cost for the example, including the
in-band hop factors (controller at S3).
"""

from __future__ import annotations

import json
import time
from importlib import resources

from . import mcps
from .costs import CostModel, InBand, OutOfBand, reply_len
from .flows import Flow
from .topology import Topology, abilene, shortest_path

EXAMPLE_EDGES = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (2, 5)]
EXAMPLE_HOSTS = {"H1": 0, "H2": 2, "H3": 3, "H4": 5, "H5": 4}
EXAMPLE_FLOWS = [
    ("f1", "H1", "H2"),
    ("f2", "H1", "H3"),
    ("f3", "H1", "H4"),
    ("f4", "H2", "H4"),
    ("f5", "H2", "H5"),
    ("f6", "H4", "H5"),
]
EXAMPLE_CONTROLLER = 2  # S3
# reference random per-flow assignment for the in-band case
EXAMPLE_RANDOM_ASSIGNMENT = {"f1": 0, "f2": 0, "f3": 0, "f4": 2, "f5": 2, "f6": 4}


def example_topology():
    return Topology(6, EXAMPLE_EDGES)


def example_flows(topology=None):
    t = topology or example_topology()
    out = []
    for fid, a, b in EXAMPLE_FLOWS:
        path = shortest_path(t, EXAMPLE_HOSTS[a], EXAMPLE_HOSTS[b])
        out.append(Flow(fid, a, b, tuple(path)))
    return out


def example_values():
    """Every regression quantity computed from the library, keyed by fixture name."""
    t = example_topology()
    flows = example_flows(t)
    oob = CostModel(t, OutOfBand())
    inb = CostModel(t, InBand(EXAMPLE_CONTROLLER))
    oob_c = mcps.construct_candidates(flows, oob)
    inb_c = mcps.construct_candidates(flows, inb)
    oob_greedy = mcps.greedy_scheme(oob_c)
    inb_opt = mcps.optimal_scheme(inb_c)
    per_flow = mcps.per_flow_baseline(flows, oob, "mincost")
    rand = mcps.assignment_cost(EXAMPLE_RANDOM_ASSIGNMENT, flows, inb)
    mincost = mcps.per_flow_baseline(flows, inb, "mincost")
    s3 = next(c for c in oob_c if c.kind == mcps.POLL_ALL and c.switch == 2)
    return {
        "request_bytes": oob.constants.l_req,
        "single_reply_bytes": reply_len(1),
        "reply_header_bytes": reply_len(0),
        "entry_bytes": reply_len(1) - reply_len(0),
        "s3_flows": sorted(s3.covered),
        "oob_greedy_cost": oob_greedy.total_cost,
        "oob_greedy_switches": sorted(oob_greedy.poll_all_switches()),
        "oob_optimal_cost": mcps.optimal_scheme(oob_c).total_cost,
        "oob_per_flow_cost": per_flow,
        "oob_savings_pct": round(100 * mcps.scheme_savings(oob_greedy, per_flow), 1),
        "inband_optimal_cost": inb_opt.total_cost,
        "inband_optimal_switches": sorted(inb_opt.poll_all_switches()),
        "inband_greedy_cost": mcps.greedy_scheme(inb_c).total_cost,
        "inband_random_per_flow_cost": rand,
        "inband_min_per_flow_cost": mincost,
        "inband_savings_vs_random_pct": round(100 * mcps.scheme_savings(inb_opt, rand), 1),
        "inband_savings_vs_min_pct": round(100 * mcps.scheme_savings(inb_opt, mincost), 1),
        "abilene_switches": abilene().n,
    }


def load_expected(path=None):
    if path is None:
        text = resources.files("flowpoll").joinpath("data/fixtures.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def run_fixtures(path=None):
    """Compare computed values with the expected table.

    Returns ``(rows, elapsed)`` where each row is
    ``(name, expected, actual, passed)``.
    """
    start = time.perf_counter()
    expected = load_expected(path)
    actual = example_values()
    rows = []
    for name, exp in expected.items():
        got = actual.get(name, "<missing>")
        rows.append((name, exp, got, got == exp))
    return rows, time.perf_counter() - start
