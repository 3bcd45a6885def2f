"""Savings on 200-switch random graphs, and what extra controllers buy."""

from flowpoll import sim
from flowpoll.costs import InBand, OutOfBand
from flowpoll.topology import parse_topology_spec

er = parse_topology_spec("er:200", seed=0)
print(er, "mean degree", er.degrees().mean())

for mode in (OutOfBand(), InBand(0)):
    for row in sim.cost_sweep(er, mode, [1000, 10000, 50000], seed=0):
        print(type(mode).__name__, row["m"], "greedy", row["greedy"],
              f"vs random {row['savings_random']:.3f}", f"vs cheapest {row['savings_mincost']:.3f}",
              "poll-all", row["poll_all"], "poll-single", row["poll_single"])

# %% Controllers are added in one seeded order, so each step keeps the previous ones.
for row in sim.controller_sweep(er, 20000, t_max=5, seed=0):
    print(row["controllers"], row["attachments"], row["greedy"])
