"""Keeping a scheme valid while flows come and go."""

import numpy as np

from flowpoll import sim
from flowpoll.synthetic import summarize

cfg = sim.ExperimentConfig(topology="er:200", seed=0,
                           workload={"kind": "synthetic", "profile": "uni1-churn", "seed": 0})
topo = sim.build_topology(cfg)
events = sim.workload_events(cfg, topo)
print(summarize(events))

res = sim.run_dynamics_experiment(cfg, topo, events)
for name in ("per_flow_cost", "recompute_cost", "dapr_fixed_cost", "dapr_ari_cost"):
    print(f"{name:16s} mean {res.mean_cost(name):10.0f}")
print("reconstructions", res.reconstructions, "coverage violations", res.coverage_violations)

# %% When did ARI decide to rebuild?
ari = res.series("ari_reconstructed")
print("ARI rebuilt at t =", res.series("time")[ari > 0].astype(int).tolist())
print("active flows every 10 s", res.series("active_flows")[::10].astype(int).tolist())
print("ARI overhead per tick", np.round(res.series("dapr_ari_cost") / res.series("recompute_cost") - 1, 3)[::10])
