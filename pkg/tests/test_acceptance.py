"""Acceptance criteria, one test each.

Every test records a ``[PASS]``/``[FAIL]`` line with the measured numbers;
the lines are printed together at the end of the pytest run (and directly
when this file is executed as a script).

  1. worked-example regression, exact integers
  2. message sizes, exact
  3. approximation oracle over 500 small instances
  4. desk-scale savings band and multi-controller reduction
  5. greedy timing at 20k and 100k flows
  6. DAPR cost, coverage and reconstruction counts under churn
  7. loss closed form vs enumeration and Monte Carlo
  8. loss metric shape properties
  9. adaptive polling savings and error inflation
 10. byte-identical reruns
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from flowpoll import afps, loss, mcps, sim
from flowpoll.costs import OPENFLOW_10, CostModel, InBand, MultiController, OutOfBand, reply_len
from flowpoll.fixtures import run_fixtures
from flowpoll.flows import generate_random_flows, write_trace
from flowpoll.sim import ExperimentConfig
from flowpoll.synthetic import PROFILES, generate_events
from flowpoll.topology import parse_topology_spec

from conftest import random_connected, random_flows

# tolerances and sizes
FIXTURE_BUDGET_S = 1.0
ORACLE_INSTANCES = 500
ORACLE_MAX_N, ORACLE_MAX_M = 6, 8
SAVINGS_BAND = (0.40, 0.60)
SWEEP_M = (1000, 5000, 20000, 50000, 100000)
INBAND_ATTACH = 0
CONTROLLER_MIN_REDUCTION = 0.10
TIME_20K_S, TIME_100K_S = 2.0, 5.0
DAPR_COST_TOLERANCE = 0.10
ENUM_TOLERANCE = 1e-12
MC_TRIALS = 100_000
MC_TOLERANCE = 0.01  # absolute, on the undercount fraction
R_LIMIT = 1e-12
UDP_POLL_RATIO_MAX = 0.50
TCP_SAVING_MIN = 0.15
TCP_ERROR_RATIO_MAX = 1.10
SEED = 0

RESULTS = []


def record(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] C{num:<2} {title}: {detail}"
    RESULTS.append(line)
    return ok


# 1 -----------------------------------------------------------------------

def test_c01_worked_example():
    rows, elapsed = run_fixtures()
    failed = [f"{n} expected {e!r} got {a!r}" for n, e, a, ok in rows if not ok]
    ok = not failed and elapsed < FIXTURE_BUDGET_S
    detail = f"{len(rows) - len(failed)}/{len(rows)} fixtures in {elapsed * 1000:.1f} ms"
    if failed:
        detail += "; " + "; ".join(failed)
    assert record(1, "worked example", ok, detail)


# 2 -----------------------------------------------------------------------

def test_c02_message_model():
    affine = all(reply_len(n) == 78 + 96 * n for n in range(1000))
    ok = OPENFLOW_10.l_req == 122 and reply_len(1) == 174 and affine
    assert record(2, "message model", ok,
                  f"request {OPENFLOW_10.l_req} B, reply {reply_len(1)} B, affine 78+96n: {affine}")


# 3 -----------------------------------------------------------------------

def _mode(kind, t, rng):
    if kind == 0:
        return OutOfBand()
    if kind == 1:
        return InBand(int(rng.integers(t.n)))
    k = int(rng.integers(2, min(3, t.n) + 1))
    return MultiController(tuple(rng.choice(t.n, size=k, replace=False).tolist()))


def test_c03_approximation_oracle():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    violations = []
    for k in range(ORACLE_INSTANCES):
        n = int(rng.integers(2, ORACLE_MAX_N + 1))
        m = int(rng.integers(1, ORACLE_MAX_M + 1))
        s = int(rng.integers(1 << 30))
        t = random_connected(n, int(rng.integers(0, 6)), s)
        flows = random_flows(t, m, s + 1)
        cm = CostModel(t, _mode(k % 3, t, rng))
        cands = mcps.construct_candidates(flows, cm)
        g = mcps.greedy_scheme(cands)
        o = mcps.optimal_scheme(cands)
        bound = mcps.approximation_bound(cands)
        worst = max(worst, g.total_cost / o.total_cost)
        ok = (o.total_cost <= g.total_cost <= bound * o.total_cost + 1e-9
              and mcps.covers(g, flows) and mcps.covers(o, flows)
              and g.total_cost <= mcps.per_flow_baseline(flows, cm))
        if not ok:
            violations.append(k)
    assert record(3, "approximation oracle", not violations,
                  f"{ORACLE_INSTANCES} instances, worst greedy/opt {worst:.4f}, violations {violations[:5]}")


# 4 -----------------------------------------------------------------------

def test_c04_desk_scale_costs():
    lo, hi = SAVINGS_BAND
    points = []
    bad = []
    for spec in ("er:200", "waxman:200"):
        t = parse_topology_spec(spec, SEED)
        models = {"oob": CostModel(t, OutOfBand()), "inband": CostModel(t, InBand(INBAND_ATTACH))}
        for m in SWEEP_M:
            flows = generate_random_flows(t, m, SEED)
            for name, cm in models.items():
                scheme = mcps.solve(flows, cm)
                base = mcps.per_flow_baseline(flows, cm, "random", SEED)
                s = mcps.scheme_savings(scheme, base)
                points.append(s)
                if not lo <= s <= hi:
                    bad.append(f"{spec}/{name}/m={m}: {s:.3f}")
    t = parse_topology_spec("er:200", SEED)
    ctrl = [r["greedy"] for r in sim.controller_sweep(t, 20000, 5, SEED)]
    monotone = all(a >= b for a, b in zip(ctrl, ctrl[1:]))
    reduction = 1 - ctrl[-1] / ctrl[0]
    ok = not bad and monotone and reduction >= CONTROLLER_MIN_REDUCTION
    detail = (f"savings {min(points):.3f}..{max(points):.3f} over {len(points)} points"
              f"{' out of band: ' + ', '.join(bad) if bad else ''}; "
              f"controllers 1->5 reduction {reduction:.3f}, non-increasing {monotone}")
    assert record(4, "desk-scale costs", ok, detail)


# 5 -----------------------------------------------------------------------

def _time_solve(t, m):
    flows = generate_random_flows(t, m, SEED)
    cm = CostModel(t, OutOfBand())
    start = time.perf_counter()
    mcps.solve(flows, cm)
    return time.perf_counter() - start


def test_c05_greedy_timing():
    t = parse_topology_spec("er:200", SEED)
    t20 = _time_solve(t, 20000)
    t100 = _time_solve(t, 100000)
    ok = t20 < TIME_20K_S and t100 < TIME_100K_S
    assert record(5, "greedy timing", ok, f"20k flows {t20:.2f} s, 100k flows {t100:.2f} s")


# 6 -----------------------------------------------------------------------

def test_c06_dapr_under_churn():
    cfg = ExperimentConfig(topology="er:200", seed=SEED,
                           workload={"kind": "synthetic", "profile": "uni1-churn", "seed": SEED})
    res = sim.run_dynamics_experiment(cfg)
    rc = res.mean_cost("recompute_cost")
    rel = {k: res.mean_cost(f"dapr_{k}_cost") / rc - 1 for k in ("fixed", "ari")}
    n = res.series("active_flows")
    ok = (all(abs(v) <= DAPR_COST_TOLERANCE for v in rel.values())
          and res.coverage_violations == 0 and res.bookkeeping_mismatches == 0
          and res.reconstructions["ari"] <= res.reconstructions["fixed"])
    detail = (f"active {int(n.min())}..{int(n.max())}; DAPR vs recompute "
              f"ari {rel['ari']:+.3f}, fixed {rel['fixed']:+.3f}; "
              f"reconstructions ari {res.reconstructions['ari']} fixed {res.reconstructions['fixed']}; "
              f"coverage violations {res.coverage_violations}")
    assert record(6, "DAPR/ARI", ok, detail)


# 7 -----------------------------------------------------------------------

def _enumeration(lp, r):
    keep = 1 - Fraction(r).limit_denominator(10**6)
    return float(1 - Fraction(lp + 1) / sum(1 / keep**i for i in range(lp + 1)))


def _monte_carlo(lp, r, rng):
    """Per-packet thinning through ``i`` lossy switches for each ``i`` in ``0..lp``.

    Surviving fractions are combined the same way the enumeration does:
    the measured count is fixed and each real count scales by the inverse
    survival.
    """
    model = loss.LossModel(1.0, r, frozenset(range(lp)))
    inv = 0.0
    for i in range(lp + 1):
        c = loss.counters_along_path_mc(list(range(i)) or [lp], MC_TRIALS, model, rng)[-1]
        inv += MC_TRIALS / c
    return 1 - (lp + 1) / inv


def test_c07_undercount_closed_form():
    worst_enum = 0.0
    for r in np.round(np.arange(0.01, 0.2001, 0.01), 2):
        for length in range(1, 9):
            for lp in range(length + 1):
                cf = loss.expected_relative_undercount(length, lp / length, float(r))
                worst_enum = max(worst_enum, abs(cf - _enumeration(lp, float(r))))
    rng = np.random.default_rng(SEED)
    worst_mc = 0.0
    for length, p, r in ((4, 0.5, 0.1), (5, 0.4, 0.05), (8, 0.5, 0.2), (8, 1.0, 0.2), (3, 1.0, 0.01)):
        lp = round(length * p)
        worst_mc = max(worst_mc, abs(loss.expected_relative_undercount(length, p, r) - _monte_carlo(lp, r, rng)))
    limit = (loss.expected_relative_undercount(6, 0.5, 0.0),
             loss.expected_relative_undercount(6, 0.5, R_LIMIT))
    ok = worst_enum <= ENUM_TOLERANCE and worst_mc <= MC_TOLERANCE and limit[0] == 0 and limit[1] < 1e-9
    detail = (f"max |closed - enumeration| {worst_enum:.2e}, max |closed - MC| {worst_mc:.2e} "
              f"({MC_TRIALS} packets), r=0 -> {limit[0]}, r={R_LIMIT} -> {limit[1]:.2e}")
    assert record(7, "loss closed form", ok, detail)


# 8 -----------------------------------------------------------------------

def test_c08_loss_metric_shapes():
    cfg = ExperimentConfig(topology="er:200", seed=SEED, workload={"kind": "random", "m": 20000},
                           loss={"p": 0.1, "r": 0.01})
    grid = [0.0, 0.05, 0.1, 0.15, 0.2]
    rows = sim.run_accuracy_experiment(cfg, r_grid=grid, p_grid=grid)
    r_rows, p_rows = rows[:5], rows[5:]
    r0 = r_rows[0]
    afr_p = [row[2] for row in p_rows]
    exact_r = [row[3] for row in r_rows]
    rel_r = [row[4] for row in r_rows]
    ok = (r0[2] == 1.0 and r0[3] == 1.0
          and all(a > b for a, b in zip(afr_p, afr_p[1:]))
          and all(a >= b for a, b in zip(exact_r, exact_r[1:]))
          and all(a > b for a, b in zip(rel_r, rel_r[1:])))
    detail = (f"r=0 AFR {r0[2]:.3f} TM {r0[3]:.3f}; AFR over p {[round(x, 4) for x in afr_p]}; "
              f"TM exact over r {[round(x, 4) for x in exact_r]}; "
              f"TM mean-relative over r {[round(x, 4) for x in rel_r]}")
    assert record(8, "loss metrics", ok, detail)


# 9 -----------------------------------------------------------------------

def _afps(profile):
    cfg = ExperimentConfig(seed=SEED, workload={"kind": "synthetic", "profile": profile, "seed": SEED})
    return sim.run_afps_experiment(cfg, sim.workload_events(cfg, None))


def test_c09_adaptive_polling():
    udp, tcp = _afps("udp"), _afps("tcp")
    udp_ratio = {a: udp.polls[a] / udp.polls[afps.PERIODIC] for a in (afps.PT, afps.EWMAT)}
    adaptive = (afps.PT, afps.EWMAT, afps.SWT)
    tcp_saving = {a: tcp.saving(a) for a in adaptive}
    tcp_error = {a: tcp.error_ratio(a) for a in adaptive}
    in_range = all(0.5 - 1e-9 <= s.interval <= 5.0 + 1e-9
                   for res in (udp, tcp) for a in adaptive for log in res.logs[a]
                   for s in log if not s.removed)
    cfg = ExperimentConfig(seed=SEED, workload={"kind": "synthetic", "profile": "tcp", "seed": SEED},
                           sampler={"alpha": 1.0})
    alpha1 = sim.run_afps_experiment(cfg, sim.workload_events(cfg, None), (afps.PT, afps.EWMAT))
    same = alpha1.logs[afps.PT] == alpha1.logs[afps.EWMAT]
    failing = [f"udp {a} polls {v:.2f}" for a, v in udp_ratio.items() if v > UDP_POLL_RATIO_MAX]
    failing += [f"tcp {a} saving {v:.2f}" for a, v in tcp_saving.items() if v < TCP_SAVING_MIN]
    failing += [f"tcp {a} error x{v:.3f}" for a, v in tcp_error.items() if v > TCP_ERROR_RATIO_MAX]
    ok = not failing and in_range and same
    fmt = lambda d: ", ".join(f"{k} {v:.3f}" for k, v in d.items())  # noqa: E731
    detail = (f"udp polls/periodic [{fmt(udp_ratio)}]; tcp saving [{fmt(tcp_saving)}]; "
              f"tcp error/periodic [{fmt(tcp_error)}]; intervals in range {in_range}; "
              f"EWMAT(alpha=1) == PT {same}")
    if failing:
        detail += "; failing: " + ", ".join(failing)
    assert record(9, "adaptive polling", ok, detail)


# 10 ----------------------------------------------------------------------

def _all_outputs():
    topo_cfg = ExperimentConfig(topology="er:200", seed=SEED,
                                workload={"kind": "synthetic", "profile": "uni1-churn", "seed": SEED})
    dyn = sim.run_dynamics_experiment(topo_cfg)
    tcp = _afps("tcp")
    acc = sim.run_accuracy_experiment(ExperimentConfig(
        topology="er:200", seed=SEED, workload={"kind": "random", "m": 20000}))
    abilene = ExperimentConfig(topology="abilene", seed=SEED,
                               workload={"kind": "synthetic", "profile": "abilene", "seed": SEED})
    mc = sim.run_mcps_experiment(abilene)
    return {
        "dynamics": sim.csv_text(sim.DYNAMICS_HEADER, dyn.rows),
        "afps": sim.csv_text(sim.AFPS_SAMPLE_HEADER, sim.afps_sample_rows(tcp, tcp.flow_ids)),
        "accuracy": sim.csv_text(sim.ACCURACY_HEADER, acc),
        "mcps": sim.csv_text(sim.MCPS_HEADER, mc),
        "trace": write_trace(generate_events(PROFILES["tcp"], 60, SEED)),
    }


def test_c10_determinism():
    a, b = _all_outputs(), _all_outputs()
    differing = [k for k in a if a[k] != b[k]]
    sizes = ", ".join(f"{k} {len(v) // 1024} KiB" for k, v in a.items())
    assert record(10, "determinism", not differing, f"{sizes}; differing {differing}")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
