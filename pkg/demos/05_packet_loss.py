"""How lossy switches bend what the collector sees."""

from flowpoll import loss, sim

# %% Expected undercount of a polled counter, closed form.
for r in (0.01, 0.05, 0.1, 0.2):
    print(r, [round(loss.expected_relative_undercount(length, 0.5, r), 4) for length in (2, 4, 6, 8)])

# %% Counters along one path with S2 and S4 lossy at 10 %.
model = loss.LossModel(0.4, 0.1, frozenset({1, 3}))
print(loss.counters_along_path([0, 1, 2, 3, 4], 10_000, model))

# %% Accurate-flow ratio and traffic-matrix accuracy on ER(200), 20k flows.
cfg = sim.ExperimentConfig(topology="er:200", workload={"kind": "random", "m": 20000}, seed=0)
print(sim.csv_text(sim.ACCURACY_HEADER, sim.run_accuracy_experiment(cfg)))
