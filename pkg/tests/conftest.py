import numpy as np
import pytest

from flowpoll.costs import InBand, MultiController, OutOfBand
from flowpoll.flows import Flow
from flowpoll.fixtures import example_flows, example_topology
from flowpoll.topology import Topology, shortest_path


def random_connected(n, extra, seed):
    """Random spanning tree plus ``extra`` chords; always connected."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(n).tolist()
    edges = {tuple(sorted((order[i], order[int(rng.integers(i))]))) for i in range(1, n)}
    for _ in range(extra):
        u, v = rng.choice(n, size=2, replace=False).tolist()
        edges.add((min(u, v), max(u, v)))
    return Topology(n, edges)


def random_flows(topology, m, seed):
    rng = np.random.default_rng(seed)
    flows = []
    for i in range(m):
        s, d = rng.choice(topology.n, size=2, replace=False).tolist()
        flows.append(Flow(f"f{i}", str(s), str(d), tuple(shortest_path(topology, s, d))))
    return flows


def random_mode(topology, seed):
    rng = np.random.default_rng(seed)
    kind = int(rng.integers(3))
    if kind == 0:
        return OutOfBand()
    if kind == 1:
        return InBand(int(rng.integers(topology.n)))
    t = int(rng.integers(1, min(3, topology.n) + 1))
    return MultiController(tuple(rng.choice(topology.n, size=t, replace=False).tolist()))


@pytest.fixture
def fig_topology():
    return example_topology()


@pytest.fixture
def fig_flows(fig_topology):
    return example_flows(fig_topology)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
