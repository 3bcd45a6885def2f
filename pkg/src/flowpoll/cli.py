"""``flowpoll`` command line: one-shot solves, experiments and the worked-example fixtures.

Exit codes: 0 success, 1 invalid input, 2 fixture failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import afps, fixtures, mcps, sim
from .costs import CostModel, mode_label, parse_mode
from .flows import FlowError, FlowStateTracker, generate_random_flows, write_trace
from .synthetic import PROFILES, summarize
from .topology import TopologyError, parse_topology_spec

EXIT_OK, EXIT_INVALID, EXIT_FIXTURES = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p, *, flows=False, trace=False, algorithm=False, optimal=False, profile=False):
    p.add_argument("--config", help="JSON experiment config; flags override its values")
    p.add_argument("--topo", help="er:n[,p] | waxman:n[,a,b] | abilene | topology file")
    p.add_argument("--mode", help="oob | inband:<switch> | multi:<s1>,<s2>,...")
    p.add_argument("--seed", type=int, help="master seed (non-negative)")
    p.add_argument("--out", help="output file (solve, topo) or directory (experiments)")
    if flows:
        p.add_argument("--flows", type=int, help="number of random flows")
    if trace:
        p.add_argument("--trace", help="flow trace CSV")
    if profile:
        p.add_argument("--profile", choices=sorted(PROFILES), help="synthetic workload profile")
        p.add_argument("--save-trace", help="also write the workload as a trace CSV")
    if algorithm:
        p.add_argument("--algorithm", choices=afps.ALGORITHMS,
                       help="run only this algorithm next to the periodic baseline")
    if optimal:
        p.add_argument("--optimal", action="store_true", help="exact solver (small instances only)")
        p.add_argument("--at", type=float, help="snapshot time when solving a trace")


def build_parser():
    parser = _Parser(prog="flowpoll", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _common(sub.add_parser("topo", help="generate or load a topology and describe it"))
    _common(sub.add_parser("solve", help="compute a polling scheme for one flow snapshot"),
            flows=True, trace=True, optimal=True)
    _common(sub.add_parser("dynamics", help="scheme cost under churn (DAPR)"),
            trace=True, profile=True)
    _common(sub.add_parser("afps", help="adaptive per-flow polling vs periodic"),
            trace=True, profile=True, algorithm=True)
    _common(sub.add_parser("accuracy", help="loss-switch accuracy sweeps"), flows=True)
    fx = sub.add_parser("paper-fixtures", help="check the worked-example regression values")
    fx.add_argument("--fixtures", help="alternative expected-values JSON")
    return parser


_DEFAULTS = {
    "topo": {},
    "solve": {"topology": "er:200", "workload": {"kind": "random", "m": 1000}},
    "dynamics": {"topology": "er:200", "workload": {"kind": "synthetic", "profile": "uni1-churn"}},
    "afps": {"topology": "er:10", "workload": {"kind": "synthetic", "profile": "tcp"}},
    "accuracy": {"topology": "er:200", "workload": {"kind": "random", "m": 20000}},
}


def resolve_config(args):
    """Merge command defaults, the config file and explicit flags."""
    data = dict(_DEFAULTS[args.command])
    if args.config:
        with open(args.config) as fh:
            data.update(json.load(fh))
    if args.seed is not None:
        if args.seed < 0:
            raise sim.ConfigError("seed must be non-negative")
        data["seed"] = args.seed
    if args.topo:
        data["topology"] = args.topo
    if args.mode:
        data["mode"] = args.mode
    workload = dict(data.get("workload", {"kind": "random", "m": 1000}))
    if getattr(args, "flows", None) is not None:
        workload = {"kind": "random", "m": args.flows}
    if getattr(args, "trace", None):
        workload = {"kind": "trace", "path": args.trace}
    if getattr(args, "profile", None):
        workload = {"kind": "synthetic", "profile": args.profile}
    if workload.get("kind") in ("random", "synthetic") and "seed" in data:
        workload.setdefault("seed", data["seed"])
    data["workload"] = workload
    return sim.ExperimentConfig.from_dict(data)


def _emit(text, out, name):
    if out is None:
        sys.stdout.write(text)
        return
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, name), "w") as fh:
        fh.write(text)


def _finish(config, out, extra=None):
    if out is not None:
        sim.write_manifest(os.path.join(out, "manifest.json"), config, extra)


def cmd_topo(args, config):
    t = parse_topology_spec(config.topology, config.seed)
    deg = t.degrees()
    summary = {"topology": config.topology, "seed": config.seed, "switches": t.n,
               "links": len(t.edges), "mean_degree": round(float(deg.mean()), 4),
               "connected": t.is_connected()}
    print(json.dumps(summary, sort_keys=True))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(t.to_edge_list())
    return EXIT_OK


def _snapshot(config, topology, at=None):
    w = config.workload
    if w["kind"] == "random":
        return generate_random_flows(topology, int(w["m"]), w.get("seed", config.seed))
    events = sim.workload_events(config, topology)
    tracker = FlowStateTracker(topology.n)
    for ev in events:
        if at is not None and ev.time > at:
            break
        tracker.apply_event(ev)
    return tracker.snapshot()


def cmd_solve(args, config):
    topology = parse_topology_spec(config.topology, config.seed)
    cm = CostModel(topology, parse_mode(config.mode))
    flows = _snapshot(config, topology, args.at)
    scheme = mcps.solve(flows, cm, optimal=args.optimal)
    baseline = mcps.per_flow_baseline(flows, cm, "mincost")
    result = {
        "mode": mode_label(cm.mode),
        "solver": "optimal" if args.optimal else "greedy",
        "flows": len(flows),
        "scheme": scheme.to_dict(),
        "cost": scheme.total_cost,
        "per_flow_cost": baseline,
        "savings": round(mcps.scheme_savings(scheme, baseline), 6) if baseline else 0.0,
    }
    text = json.dumps(result, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"cost {scheme.total_cost} vs per-flow {baseline} "
          f"(savings {100 * result['savings']:.1f}%)", file=sys.stderr)
    return EXIT_OK


def _save_trace(args, config, topology):
    if getattr(args, "save_trace", None):
        with open(args.save_trace, "w") as fh:
            fh.write(write_trace(sim.workload_events(config, topology)))


def cmd_dynamics(args, config):
    topology = parse_topology_spec(config.topology, config.seed)
    events = sim.workload_events(config, topology)
    _save_trace(args, config, topology)
    res = sim.run_dynamics_experiment(config, topology, events)
    _emit(sim.csv_text(sim.DYNAMICS_HEADER, res.rows), args.out, "dynamics.csv")
    for name, rows in res.reports.items():
        if args.out:
            _emit(sim.csv_text(sim.DAPR_REPORT_HEADER, rows), args.out, f"dapr_{name}.csv")
    summary = {"reconstructions": res.reconstructions,
               "coverage_violations": res.coverage_violations,
               "trace": summarize(events)}
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    _finish(config, args.out, summary)
    return EXIT_OK


def cmd_afps(args, config):
    events = sim.workload_events(config, None)
    _save_trace(args, config, None)
    algs = afps.ALGORITHMS if not args.algorithm else tuple(dict.fromkeys((afps.PERIODIC, args.algorithm)))
    res = sim.run_afps_experiment(config, events, algs)
    summary_rows = [[a, res.polls[a], res.errors[a], res.saving(a)] for a in algs]
    _emit(sim.csv_text(["algorithm", "polls", "error", "poll_saving"], summary_rows),
          args.out, "afps_summary.csv")
    if args.out:
        header = ["time", "true_bytes"] + [f"{a}_bytes" for a in algs]
        util = [[t, x, *(res.measured[a][i] for a in algs)]
                for i, (t, x) in enumerate(zip(res.ticks.tolist(), res.truth.tolist()))]
        _emit(sim.csv_text(header, util), args.out, "utilization.csv")
        _emit(sim.csv_text(sim.AFPS_SAMPLE_HEADER, sim.afps_sample_rows(res, res.flow_ids)),
              args.out, "samples.csv")
    _finish(config, args.out, {"trace": summarize(events)})
    return EXIT_OK


def cmd_accuracy(args, config):
    rows = sim.run_accuracy_experiment(config)
    _emit(sim.csv_text(sim.ACCURACY_HEADER, rows), args.out, "accuracy.csv")
    _finish(config, args.out)
    return EXIT_OK


def cmd_paper_fixtures(args):
    print("# config " + json.dumps({"fixtures": args.fixtures or "builtin"}), file=sys.stderr)
    rows, elapsed = fixtures.run_fixtures(args.fixtures)
    width = max(len(r[0]) for r in rows)
    failed = 0
    for name, exp, got, ok in rows:
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  expected={exp!r}  actual={got!r}")
    print(f"{len(rows) - failed}/{len(rows)} fixtures passed in {elapsed:.3f}s")
    return EXIT_OK if failed == 0 else EXIT_FIXTURES


COMMANDS = {"topo": cmd_topo, "solve": cmd_solve, "dynamics": cmd_dynamics,
            "afps": cmd_afps, "accuracy": cmd_accuracy}

INPUT_ERRORS = (UsageError, sim.ConfigError, TopologyError, FlowError, mcps.InstanceTooLarge,
                ValueError, KeyError, OSError)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if args.command == "paper-fixtures":
            return cmd_paper_fixtures(args)
        config = resolve_config(args)
        print("# config " + json.dumps(config.to_dict(), sort_keys=True), file=sys.stderr)
        return COMMANDS[args.command](args, config)
    except INPUT_ERRORS as exc:
        print(f"flowpoll: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
