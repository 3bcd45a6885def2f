"""Cost-aware flow statistics polling for software-defined networks."""

from .costs import OPENFLOW_10, CostModel, InBand, MessageConstants, MultiController, OutOfBand
from .dynamics import ARI, DynamicScheme, Fixed
from .flows import Flow, FlowStateTracker, generate_random_flows, parse_trace, write_trace
from .mcps import PollingScheme, construct_candidates, greedy_scheme, optimal_scheme, solve
from .topology import Topology, gen_erdos_renyi, gen_waxman, load_topology

__all__ = [
    "ARI", "CostModel", "DynamicScheme", "Fixed", "Flow", "FlowStateTracker", "InBand",
    "MessageConstants", "MultiController", "OPENFLOW_10", "OutOfBand", "PollingScheme",
    "Topology", "construct_candidates", "gen_erdos_renyi", "gen_waxman", "generate_random_flows",
    "greedy_scheme", "load_topology", "optimal_scheme", "parse_trace", "solve", "write_trace",
]

__version__ = "0.1.0"
