"""Per-flow polling intervals that follow the traffic."""

from flowpoll import afps, sim
from flowpoll.afps import ByteSeries, SamplerConfig, schedule

# %% One flow: busy for 10 s, idle for 20 s, busy again.
times = [0.1 * i for i in range(400) if not 100 <= i < 300]
series = ByteSeries(times, [5000] * len(times))
for alg in afps.ALGORITHMS:
    log = schedule(series, SamplerConfig(algorithm=alg), 0.0, horizon=40.0)
    print(f"{alg:8s} {afps.poll_count(log):3d} polls, intervals", [round(s.interval, 2) for s in log][:14])

# %% A whole link of synthetic TCP and UDP flows.
for profile in ("tcp", "udp"):
    cfg = sim.ExperimentConfig(workload={"kind": "synthetic", "profile": profile, "seed": 0})
    res = sim.run_afps_experiment(cfg)
    for alg in afps.ALGORITHMS:
        print(f"{profile} {alg:8s} polls {res.polls[alg]:6d} saving {res.saving(alg):6.1%} "
              f"error {res.errors[alg]:10.0f} ({res.error_ratio(alg):.2f}x periodic)")
