"""Switch graphs: random generators, edge-list loading and BFS routing."""

from __future__ import annotations

import math
from collections import deque
from importlib import resources
from itertools import combinations

import numpy as np

MAX_ATTEMPTS = 100


class TopologyError(ValueError):
    """Raised for malformed or disconnected topologies."""


class Topology:
    """Undirected simple graph over switches ``0..n-1``.

    Instances are immutable. BFS trees are memoised per source so that
    routing thousands of flows only pays one traversal per source switch.
    """

    def __init__(self, n, edges):
        n = int(n)
        if n < 1:
            raise TopologyError(f"switch count must be positive, got {n}")
        norm = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise TopologyError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise TopologyError(f"self-loop on switch {u}")
            norm.add((min(u, v), max(u, v)))
        self._n = n
        self._edges = frozenset(norm)
        adj = [[] for _ in range(n)]
        for u, v in norm:
            adj[u].append(v)
            adj[v].append(u)
        self._adj = tuple(tuple(sorted(a)) for a in adj)
        self._bfs_cache = {}

    @property
    def n(self):
        return self._n

    @property
    def edges(self):
        return self._edges

    def neighbors(self, v):
        return self._adj[v]

    def has_edge(self, u, v):
        return (min(u, v), max(u, v)) in self._edges

    def degrees(self):
        return np.array([len(a) for a in self._adj], dtype=np.int64)

    def is_connected(self):
        return len(self._bfs(0)[1]) == self._n

    def __eq__(self, other):
        return isinstance(other, Topology) and self._n == other._n and self._edges == other._edges

    def __hash__(self):
        return hash((self._n, self._edges))

    def __repr__(self):
        return f"Topology(n={self._n}, edges={len(self._edges)})"

    def _bfs(self, src):
        cached = self._bfs_cache.get(src)
        if cached is not None:
            return cached
        parent = {src: -1}
        dist = {src: 0}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for w in self._adj[u]:
                if w not in parent:
                    parent[w] = u
                    dist[w] = dist[u] + 1
                    queue.append(w)
        self._bfs_cache[src] = (parent, dist)
        return parent, dist

    def distance(self, u, v):
        """Link count of a shortest path between ``u`` and ``v``."""
        return self._bfs(u)[1][v]

    def to_edge_list(self):
        lines = [f"n={self._n}"]
        lines += [f"{u} {v}" for u, v in sorted(self._edges)]
        return "\n".join(lines) + "\n"


def _check_switch(t, v):
    if not 0 <= v < t.n:
        raise TopologyError(f"switch {v} not in topology with n={t.n}")


def shortest_path(t, src, dst):
    """Minimum-link path from ``src`` to ``dst`` as a list of switch ids.

    BFS expands neighbors in ascending id order, so ties are broken
    deterministically.
    """
    _check_switch(t, src)
    _check_switch(t, dst)
    parent, _ = t._bfs(src)
    if dst not in parent:
        raise TopologyError(f"switch {dst} unreachable from {src}")
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def hop_counts(t, attach):
    """Per-switch hop values towards a controller attached at ``attach``.

    A switch's hop value counts the switches on its control path including
    itself, i.e. links + 1, so the attachment switch has value 1.
    """
    _check_switch(t, attach)
    _, dist = t._bfs(attach)
    return np.array([dist[v] + 1 for v in range(t.n)], dtype=np.int64)


def _derived_rng(seed, attempt):
    return np.random.default_rng([int(seed), attempt])


def _retry_connected(build, what):
    for attempt in range(MAX_ATTEMPTS):
        t = build(attempt)
        if t.is_connected():
            return t
    raise TopologyError(f"{what}: no connected graph after {MAX_ATTEMPTS} attempts")


def gen_erdos_renyi(n, p_edge, seed=0):
    """G(n, p) random graph, regenerated under derived seeds until connected."""
    if n < 2:
        raise TopologyError("need at least 2 switches")
    if not 0 < p_edge <= 1:
        raise TopologyError(f"p_edge must be in (0, 1], got {p_edge}")
    iu, ju = np.triu_indices(n, k=1)

    def build(attempt):
        rng = _derived_rng(seed, attempt)
        keep = rng.random(iu.size) < p_edge
        return Topology(n, zip(iu[keep].tolist(), ju[keep].tolist()))

    return _retry_connected(build, f"erdos_renyi(n={n}, p={p_edge})")


def gen_waxman(n, alpha=0.5, beta=0.5, seed=0):
    """Waxman graph on uniform points in the unit square.

    An edge (u, v) appears with probability
    ``beta * exp(-d(u, v) / (alpha * d_max))``.
    """
    if n < 2:
        raise TopologyError("need at least 2 switches")
    if not (0 < alpha <= 1 and 0 < beta <= 1):
        raise TopologyError("alpha and beta must lie in (0, 1]")
    iu, ju = np.triu_indices(n, k=1)

    def build(attempt):
        rng = _derived_rng(seed, attempt)
        pos = rng.random((n, 2))
        d = np.hypot(*(pos[iu] - pos[ju]).T)
        d_max = d.max()
        prob = beta * np.exp(-d / (alpha * d_max)) if d_max > 0 else np.full(d.size, beta)
        keep = rng.random(iu.size) < prob
        return Topology(n, zip(iu[keep].tolist(), ju[keep].tolist()))

    return _retry_connected(build, f"waxman(n={n}, alpha={alpha}, beta={beta})")


def er_probability_for_degree(n, mean_degree=4.0):
    """Edge probability giving the requested expected degree."""
    return min(1.0, mean_degree / (n - 1))


def load_topology(source):
    """Parse the ``n=<int>`` + ``u v`` edge-list format; ``#`` starts a comment."""
    n = None
    edges = []
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if n is None:
            key, sep, val = line.partition("=")
            if not sep or key.strip() != "n":
                raise TopologyError(f"line {lineno}: expected header 'n=<int>', got {raw!r}")
            try:
                n = int(val)
            except ValueError:
                raise TopologyError(f"line {lineno}: bad switch count {val!r}") from None
            if n < 1:
                raise TopologyError(f"line {lineno}: switch count must be positive")
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TopologyError(f"line {lineno}: expected 'u v', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise TopologyError(f"line {lineno}: non-integer switch id in {raw!r}") from None
        if not (0 <= u < n and 0 <= v < n):
            raise TopologyError(f"line {lineno}: switch id out of range 0..{n - 1}")
        if u == v:
            raise TopologyError(f"line {lineno}: self-loop on switch {u}")
        edges.append((u, v))
    if n is None:
        raise TopologyError("empty topology source")
    t = Topology(n, edges)
    if not t.is_connected():
        raise TopologyError(f"topology with n={n} is disconnected")
    return t


def abilene():
    """The 10-switch Abilene backbone shipped with the package."""
    text = resources.files("flowpoll").joinpath("data/abilene.txt").read_text()
    return load_topology(text)


def complete_graph(n):
    return Topology(n, combinations(range(n), 2))


def path_graph(n):
    return Topology(n, ((i, i + 1) for i in range(n - 1)))


def parse_topology_spec(spec, seed=0):
    """Resolve ``er:n,p`` / ``waxman:n,a,b`` / ``abilene`` / file path strings."""
    kind, _, args = spec.partition(":")
    if kind == "er" and args:
        parts = args.split(",")
        n = int(parts[0])
        p = float(parts[1]) if len(parts) > 1 else er_probability_for_degree(n)
        return gen_erdos_renyi(n, p, seed)
    if kind == "waxman" and args:
        parts = args.split(",")
        n = int(parts[0])
        a = float(parts[1]) if len(parts) > 1 else 0.5
        b = float(parts[2]) if len(parts) > 2 else 0.5
        return gen_waxman(n, a, b, seed)
    if spec == "abilene":
        return abilene()
    with open(spec) as fh:
        return load_topology(fh.read())


def expected_edge_band(n, p, sigmas=3.0):
    mean = math.comb(n, 2) * p
    sd = math.sqrt(math.comb(n, 2) * p * (1 - p))
    return mean - sigmas * sd, mean + sigmas * sd
