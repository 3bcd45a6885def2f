"""OpenFlow statistics message sizes and per-switch polling costs.

All costs are integers in byte*hop units. Out-of-band control traffic is
modelled as a hop factor of 1 for every switch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import hop_counts


@dataclass(frozen=True)
class MessageConstants:
    l_req: int = 122
    l_reply_header: int = 78
    l_single_flow_entry: int = 96

    def reply_len(self, n):
        return self.l_reply_header + n * self.l_single_flow_entry

    @property
    def single_total(self):
        """Request plus one-entry reply."""
        return self.l_req + self.reply_len(1)


OPENFLOW_10 = MessageConstants()


@dataclass(frozen=True)
class OutOfBand:
    pass


@dataclass(frozen=True)
class InBand:
    attach: int


@dataclass(frozen=True)
class MultiController:
    attachments: tuple

    def __post_init__(self):
        att = tuple(int(a) for a in self.attachments)
        if not att:
            raise ValueError("MultiController needs at least one attachment")
        if len(set(att)) != len(att):
            raise ValueError("controller attachments must be distinct")
        object.__setattr__(self, "attachments", att)


def reply_len(n, constants=OPENFLOW_10):
    if n < 0:
        raise ValueError("entry count must be non-negative")
    return constants.reply_len(n)


def hop_matrix(topology, mode):
    """Hop factors with shape ``(controllers, switches)``."""
    if isinstance(mode, OutOfBand):
        return np.ones((1, topology.n), dtype=np.int64)
    if isinstance(mode, InBand):
        return hop_counts(topology, mode.attach)[None, :]
    if isinstance(mode, MultiController):
        return np.stack([hop_counts(topology, a) for a in mode.attachments])
    raise TypeError(f"unknown deployment mode {mode!r}")


def _best_controller(hops_col):
    """(hop factor, controller index) minimising cost; lowest index on ties."""
    j = int(np.argmin(hops_col))
    return int(hops_col[j]), j


def poll_all_cost(flow_count, hops_col, constants=OPENFLOW_10):
    """Cost of a wildcard poll of a switch holding ``flow_count`` flows.

    ``hops_col`` holds the switch's hop factor towards each controller
    (a single 1 out-of-band). Returns ``(cost, controller)``.
    """
    if flow_count < 0:
        raise ValueError("flow count must be non-negative")
    h, j = _best_controller(np.atleast_1d(hops_col))
    return (constants.l_req + constants.reply_len(flow_count)) * h, j


def poll_single_cost(hops_col, constants=OPENFLOW_10):
    return poll_all_cost(1, hops_col, constants)


class CostModel:
    """Per-switch hop factors for one deployment, pre-minimised over controllers."""

    def __init__(self, topology, mode=None, constants=OPENFLOW_10):
        self.topology = topology
        self.mode = OutOfBand() if mode is None else mode
        self.constants = constants
        self.hops = hop_matrix(topology, self.mode)
        self.controller = np.argmin(self.hops, axis=0).astype(np.int64)
        self.factor = self.hops.min(axis=0)
        self._factor_list = self.factor.tolist()
        self._ctrl_list = self.controller.tolist()

    @property
    def n(self):
        return self.topology.n

    def poll_all_cost(self, switch, flow_count):
        c = self.constants
        return (c.l_req + c.reply_len(flow_count)) * self._factor_list[switch], self._ctrl_list[switch]

    def poll_single_cost(self, switch):
        return self.poll_all_cost(switch, 1)

    def min_single_cost(self, path):
        """Cheapest single-flow poll along ``path``: ``(cost, switch, controller)``.

        Ties go to the lowest switch id.
        """
        fac = self._factor_list
        best = min(path, key=lambda v: (fac[v], v))
        return self.constants.single_total * fac[best], best, self._ctrl_list[best]

    def all_weights(self, counts):
        """Vectorised poll-all weights for per-switch flow counts."""
        c = self.constants
        counts = np.asarray(counts, dtype=np.int64)
        return (c.l_req + c.l_reply_header + counts * c.l_single_flow_entry) * self.factor


def parse_mode(text):
    """``oob`` | ``inband:<attach>`` | ``multi:a1,a2,...``"""
    kind, _, args = text.partition(":")
    if kind == "oob" and not args:
        return OutOfBand()
    if kind == "inband" and args:
        return InBand(int(args))
    if kind == "multi" and args:
        return MultiController(tuple(int(a) for a in args.split(",")))
    raise ValueError(f"bad deployment mode {text!r}")


def mode_label(mode):
    if isinstance(mode, OutOfBand):
        return "oob"
    if isinstance(mode, InBand):
        return f"inband:{mode.attach}"
    return "multi:" + ",".join(str(a) for a in mode.attachments)
