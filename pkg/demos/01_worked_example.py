"""Six switches, six flows: why mixing wildcard and exact-match polls pays off."""

from flowpoll import mcps
from flowpoll.costs import CostModel, InBand, OutOfBand
from flowpoll.fixtures import EXAMPLE_RANDOM_ASSIGNMENT, example_flows, example_topology

topo = example_topology()
flows = example_flows(topo)
for f in flows:
    print(f.id, "S" + "-S".join(str(v + 1) for v in f.path))

# %% Out of band: every switch is one hop from the controller.
oob = CostModel(topo, OutOfBand())
cands = mcps.construct_candidates(flows, oob)
for c in cands[:6]:
    print(f"poll-all S{c.switch + 1}: {len(c.covered)} flows, {c.weight} B")

greedy = mcps.greedy_scheme(cands)
per_flow = mcps.per_flow_baseline(flows, oob)
print("greedy polls", [f"S{s + 1}" for s in greedy.poll_all_switches()], "cost", greedy.total_cost)
print("per-flow cost", per_flow, f"savings {mcps.scheme_savings(greedy, per_flow):.1%}")

# %% In band: the controller hangs off S3, so distant switches cost more.
inb = CostModel(topo, InBand(2))
print("hop factors", inb.factor.tolist())
best = mcps.solve(flows, inb, optimal=True)
rand = mcps.assignment_cost(EXAMPLE_RANDOM_ASSIGNMENT, flows, inb)
cheap = mcps.per_flow_baseline(flows, inb)
print("optimal", best.total_cost, "random per-flow", rand, "cheapest per-flow", cheap)
print(best.to_json())
