import json

import numpy as np
import pytest

from flowpoll import afps, sim
from flowpoll.costs import InBand, OutOfBand
from flowpoll.flows import ARR, EXP, TraceEvent, generate_random_flows, parse_trace
from flowpoll.sim import ConfigError, ExperimentConfig
from flowpoll.synthetic import (
    PROFILES,
    TCP_LIKE,
    UDP_LIKE,
    generate_events,
    generate_synthetic_trace,
    summarize,
)
from flowpoll.topology import gen_erdos_renyi


def test_config_validation(tmp_path):
    with pytest.raises(ConfigError):
        ExperimentConfig(tick=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(tick=2, duration=1)
    with pytest.raises(ConfigError):
        ExperimentConfig(workload={"kind": "pcap"})
    with pytest.raises(ConfigError, match="unknown config keys"):
        ExperimentConfig.from_dict({"topolgy": "er:10"})
    f = tmp_path / "c.json"
    f.write_text(json.dumps({"topology": "er:30", "seed": 4}))
    cfg = ExperimentConfig.load(f)
    assert cfg.seed == 4 and cfg.polling_interval == 5.0 and cfg.tick == 1.0
    assert cfg.digest() == ExperimentConfig.load(f).digest()
    assert cfg.digest() != ExperimentConfig(topology="er:30", seed=5).digest()


def test_manifest_records_hash_and_seed(tmp_path):
    cfg = ExperimentConfig(seed=9)
    sim.write_manifest(tmp_path / "m.json", cfg, {"note": 1})
    data = json.loads((tmp_path / "m.json").read_text())
    assert data["config_sha256"] == cfg.digest() and data["seed"] == 9 and data["note"] == 1


def test_csv_text():
    assert sim.csv_text(["a", "b"], [[1, 0.5], [True, "x"]]) == "a,b\n1,0.5\n1,x\n"


def test_zero_flows_cost_nothing():
    t = gen_erdos_renyi(10, 0.4, 0)
    cfg = ExperimentConfig(topology="er:10,0.4", workload={"kind": "random", "m": 0})
    row = sim.run_mcps_experiment(cfg, t)[0]
    assert row[1:5] == [0, 0, 0, 0]


def test_mcps_time_series_on_trace():
    t = gen_erdos_renyi(25, 0.2, 1)
    events = generate_events(PROFILES["abilene"], 20, seed=1, topology=t)
    cfg = ExperimentConfig(topology="er:25,0.2", duration=20, workload={"kind": "trace", "path": "-"})
    rows = sim.run_mcps_experiment(cfg, t, events)
    assert [r[0] for r in rows] == [0.0, 5.0, 10.0, 15.0, 20.0]
    for r in rows:
        assert r[2] <= r[4] and r[4] <= r[3]  # greedy <= min per-flow <= random per-flow


def test_cost_sweep_and_controller_sweep():
    t = gen_erdos_renyi(60, 0.07, 2)
    rows = sim.cost_sweep(t, InBand(0), [200, 800])
    assert [r["m"] for r in rows] == [200, 800]
    ctrl = sim.controller_sweep(t, 1000, t_max=4, seed=1)
    costs = [r["greedy"] for r in ctrl]
    assert costs == sorted(costs, reverse=True)
    assert all(a["attachments"] == b["attachments"][:len(a["attachments"])] for a, b in zip(ctrl, ctrl[1:]))


def test_synthetic_trace_is_deterministic_and_well_formed():
    a = generate_synthetic_trace(TCP_LIKE, 10, seed=7)
    assert a == generate_synthetic_trace(TCP_LIKE, 10, seed=7)
    assert a != generate_synthetic_trace(TCP_LIKE, 10, seed=8)
    assert generate_events(TCP_LIKE, 0, seed=1) == []
    events = parse_trace(a)
    assert [e.time for e in events] == sorted(e.time for e in events)


@pytest.mark.parametrize("name", sorted(PROFILES))
def test_profile_targets_within_ten_percent(name):
    prof = PROFILES[name]
    s = summarize(generate_events(prof, 60, seed=0))
    if prof.target_flows:
        assert abs(s["flows"] - prof.target_flows) <= 0.1 * prof.target_flows
    if prof.target_peak:
        assert abs(s["peak"] - prof.target_peak) <= 0.1 * prof.target_peak


def test_udp_flows_are_fewer_and_longer_than_tcp():
    def lifetimes(events):
        arr = {e.flow_id: e.time for e in events if e.kind == ARR}
        return [e.time - arr[e.flow_id] for e in events if e.kind == EXP]
    tcp, udp = generate_events(TCP_LIKE, 60, 0), generate_events(UDP_LIKE, 60, 0)
    assert summarize(udp)["flows"] * 10 < summarize(tcp)["flows"]
    assert np.median(lifetimes(udp)) > np.median(lifetimes(tcp))


def test_recompute_never_exceeds_per_flow_under_churn():
    cfg = ExperimentConfig(topology="er:60", duration=20, seed=2,
                           workload={"kind": "synthetic", "profile": "uni1-churn", "seed": 2})
    res = sim.run_dynamics_experiment(cfg)
    assert (res.series("recompute_cost") <= res.series("per_flow_cost")).all()
    assert res.coverage_violations == 0 and res.bookkeeping_mismatches == 0
    assert len(res.rows) == 21


def test_afps_constant_traffic_is_exact():
    # every flow sends the same bytes in each whole second, sampled once per second
    events = []
    for i in range(4):
        f = generate_random_flows(gen_erdos_renyi(5, 0.8, 0), 1, i, start_id=i)[0]
        events.append(TraceEvent(0.0, ARR, f.id, f))
        events += [TraceEvent(k + 0.5, "BYT", f.id, bytes=1000) for k in range(30)]
    events.sort(key=lambda e: e.time)
    cfg = ExperimentConfig(duration=30)
    res = sim.run_afps_experiment(cfg, events, algorithms=(afps.PERIODIC, afps.PT))
    assert res.errors[afps.PERIODIC] == 0 and res.errors[afps.PT] == 0
    assert res.polls[afps.PT] == res.polls[afps.PERIODIC]


def test_accuracy_r_zero_is_perfect():
    cfg = ExperimentConfig(topology="er:40", workload={"kind": "random", "m": 400}, seed=1)
    rows = sim.run_accuracy_experiment(cfg, r_grid=[0.0, 0.1], p_grid=[0.0])
    assert rows[0][2:] == [1.0, 1.0, 1.0]
    assert rows[2][2:] == [1.0, 1.0, 1.0]
    assert rows[1][2] < 1.0


def test_out_of_band_default_mode():
    cfg = ExperimentConfig()
    assert cfg.mode == "oob" and isinstance(sim.parse_mode(cfg.mode), OutOfBand)
