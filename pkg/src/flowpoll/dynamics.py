"""Keeping a polling scheme valid under flow churn.

Arrivals and expiries patch the current scheme; a reconstruction policy
decides when to throw the patches away and re-solve with the greedy.
``total_cost`` is always the live cost of issuing the scheme right now, so
poll-all replies grow and shrink with the flows passing those switches.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import mcps


@dataclass(frozen=True)
class Fixed:
    interval: float


@dataclass(frozen=True)
class ARI:
    threshold: float


def parse_policy(text):
    """``fixed:<seconds>`` | ``ari:<threshold>`` | ``never``"""
    kind, _, arg = text.partition(":")
    if kind == "fixed":
        return Fixed(float(arg))
    if kind == "ari":
        return ARI(float(arg))
    if kind == "never":
        return None
    raise ValueError(f"bad reconstruction policy {text!r}")


def flow_variance_rate(reference, current):
    """Fraction of the reference flows that are still active."""
    if not reference:
        raise ZeroDivisionError("empty reference flow set")
    return len(reference & current) / len(reference)


class DynamicScheme:
    def __init__(self, cost_model, policy=None):
        self.cost_model = cost_model
        self.policy = policy
        self.scheme = mcps.PollingScheme()
        self.reference = frozenset()
        self.reconstruction_count = 0
        self.last_reconstruction = 0.0
        self._polled = set()
        self._entry_cost = {}
        self._entry = cost_model.constants.l_single_flow_entry

    @property
    def total_cost(self):
        return self.scheme.total_cost

    def _install(self, scheme, flows, clock):
        self.scheme = mcps.PollingScheme(list(scheme.poll_all), dict(scheme.poll_single),
                                         scheme.total_cost)
        self._polled = {s for s, _ in scheme.poll_all}
        hops = self.cost_model.hops
        self._entry_cost = {s: self._entry * int(hops[c, s]) for s, c in scheme.poll_all}
        self.reference = frozenset(f.id for f in flows)
        self.last_reconstruction = clock

    def reconstruct(self, flows, clock=0.0, count=True):
        scheme = mcps.greedy_scheme(mcps.construct_candidates(flows, self.cost_model))
        self._install(scheme, flows, clock)
        if count:
            self.reconstruction_count += 1
        return self

    def on_arrival(self, flow):
        hit = [v for v in flow.path if v in self._polled]
        if hit:
            self.scheme.total_cost += sum(self._entry_cost[v] for v in hit)
        else:
            q, sw, ctrl = self.cost_model.min_single_cost(flow.path)
            self.scheme.poll_single[flow.id] = (sw, ctrl)
            self.scheme.total_cost += q
        return self

    def on_expiry(self, flow):
        single = self.scheme.poll_single.pop(flow.id, None)
        if single is not None:
            self.scheme.total_cost -= mcps.single_cost_at(self.cost_model, *single)
        for v in flow.path:
            if v in self._polled:
                self.scheme.total_cost -= self._entry_cost[v]
        return self

    def should_reconstruct(self, active_ids, clock):
        p = self.policy
        if p is None:
            return False
        if isinstance(p, Fixed):
            return clock - self.last_reconstruction >= p.interval - 1e-9
        if not self.reference:
            return bool(active_ids)
        return flow_variance_rate(self.reference, active_ids) < p.threshold

    def maybe_reconstruct(self, tracker, clock):
        """Re-solve if the policy fires; returns True when it did."""
        active = tracker.active
        if not self.should_reconstruct(active.keys(), clock):
            return False
        self.reconstruct(tuple(active.values()), clock)
        return True


def dapr_on_arrival(state, flow):
    return state.on_arrival(flow)


def dapr_on_expiry(state, flow):
    return state.on_expiry(flow)


def maybe_reconstruct(state, tracker, clock):
    state.maybe_reconstruct(tracker, clock)
    return state
