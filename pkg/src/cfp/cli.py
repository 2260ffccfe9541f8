"""Command-line frontend.

Exit codes: 0 success (and convergence for runs), 1 non-convergence or
divergence, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from .algorithms import validate_schedule
from .errors import CFPError, ScenarioError
from .graph import (
    DeltaGraphParams,
    Digraph,
    SwitchingSchedule,
    contraction_rate,
    delta_graph,
    has_spanning_tree,
    is_balanced,
    is_strongly_connected,
    laplacian_spectrum,
    left_null_eigenvector,
    spanning_tree_roots,
    step_size_bound,
)
from .harness import Scenario, run
from .scenarios import decode_schedule, decode_topology, load_scenario, paper_scenario, scenario_to_dict


def _err(msg):
    print(msg, file=sys.stderr)


def _apply_overrides(sc: Scenario, args) -> Scenario:
    kw = {k: getattr(args, k) for k in ("tau", "h", "dt", "horizon") if getattr(args, k, None) is not None}
    if not kw:
        return sc
    return replace(sc, config=replace(sc.config, **kw))


def _summarize(sc, report):
    fm = report.final_metrics
    _err(f"{sc.name or sc.algorithm}: {report.status} after {report.steps} steps "
         f"(t = {report.final_time:g}, {report.wall_time:.2f} s, backend {report.diagnostics.get('backend')})")
    _err("  final point   " + np.array2string(report.final_point, precision=6))
    _err(f"  consensus {fm['consensus_error']:.3e}  set residual {fm['max_set_residual']:.3e}  "
         f"inequality residual {fm['max_inequality_residual']:.3e}")
    if report.violations:
        _err(f"  {len(report.violations)} assertion violations")


def _execute(sc: Scenario, out, report_path) -> int:
    traj, report = run(sc)
    if out:
        traj.to_csv(out)
    if report_path:
        report.to_json(report_path)
    else:
        sys.stdout.write(report.to_json())
    _summarize(sc, report)
    return 0 if report.converged else 1


def cmd_run(args) -> int:
    sc = _apply_overrides(load_scenario(args.scenario), args)
    return _execute(sc, args.out, args.report)


def cmd_paper_case(args) -> int:
    sc = _apply_overrides(paper_scenario(args.case), args)
    if args.dump_scenario:
        sys.stdout.write(json.dumps(scenario_to_dict(sc), indent=2) + "\n")
        return 0
    return _execute(sc, args.out, args.report)


def _fmt_complex(z):
    return f"{z.real:.6g}{z.imag:+.6g}j"


def graph_diagnostics(g: Digraph) -> dict:
    d = {
        "n": g.n,
        "strongly_connected": is_strongly_connected(g),
        "spanning_tree": has_spanning_tree(g),
        "spanning_tree_roots": spanning_tree_roots(g),
        "balanced": is_balanced(g),
        "spectrum": [_fmt_complex(z) for z in laplacian_spectrum(g)],
    }
    if d["spanning_tree"]:
        d["step_size_bound"] = step_size_bound(g)
    if d["strongly_connected"]:
        d["left_null_eigenvector"] = left_null_eigenvector(g).tolist()
    return d


def cmd_check_graph(args) -> int:
    h = args.h
    window = None
    if args.scenario:
        sc = load_scenario(args.scenario)
        topo = sc.topology
        if h is None and sc.algorithm == "distributed_discrete":
            h = sc.config.h
        dg = sc.expected.get("delta_graph") if isinstance(sc.expected, dict) else None
        if dg:
            window = (dg["T"], dg["delta"])
    else:
        with open(args.graph) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ScenarioError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}, column {exc.colno}") from exc
        topo = decode_topology(data.get("topology", data), None)
    if args.T is not None and args.delta is not None:
        window = (args.T, args.delta)
    if topo is None:
        raise ScenarioError("scenario has no topology")

    report = {}
    if isinstance(topo, SwitchingSchedule):
        report["period"] = topo.period
        report["graphs"] = [graph_diagnostics(g) for g in topo.graphs]
        report["balanced"] = all(is_balanced(g) for g in topo.graphs)
        if window is None:
            window = (topo.period, min(d for _, d in topo.segments) * min(
                float(g.weights[g.weights > 0].min()) if np.any(g.weights > 0) else 1.0 for g in topo.graphs))
        T, delta = window
        dg = delta_graph(topo, DeltaGraphParams(T, delta))
        report["delta_graph"] = {
            "T": T, "delta": delta,
            "edges": [[j, i] for j, i, _ in dg.edges()],
            "strongly_connected": is_strongly_connected(dg),
            "contraction_rate": contraction_rate(topo.n, delta, T),
        }
    else:
        report.update(graph_diagnostics(topo))
        if h is not None and "step_size_bound" in report:
            report["h"] = h
            report["h_admissible"] = bool(0 < h < report["step_size_bound"])
    sys.stdout.write(json.dumps(report, indent=2) + "\n")
    if "step_size_bound" in report:
        _err(f"step size bound rho = {report['step_size_bound']:.6g}")
    if "h" in report:
        _err(f"h = {report['h']:g} {'<' if report['h_admissible'] else '>='} rho")
    if "delta_graph" in report:
        dg = report["delta_graph"]
        _err(f"delta-graph (T={dg['T']:g}, delta={dg['delta']:g}) strongly connected: {dg['strongly_connected']}; "
             f"gamma = {dg['contraction_rate']!r}")
    return 0


def cmd_validate_schedule(args) -> int:
    spec = json.loads(args.schedule)
    sched = decode_schedule(spec, args.role, "schedule")
    rep = validate_schedule(sched, args.theorem, args.horizon)
    sys.stdout.write(json.dumps(rep.__dict__, indent=2) + "\n")
    verdict = {True: "valid", False: "invalid", None: "unknown"}[rep.valid]
    _err(f"{verdict}: {rep.reason}")
    return 0 if rep.valid else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfp", description="Distributed convex feasibility solvers")
    sub = p.add_subparsers(dest="command", required=True)

    def overrides(sp):
        sp.add_argument("--tau", type=float)
        sp.add_argument("--h", type=float)
        sp.add_argument("--dt", type=float)
        sp.add_argument("--horizon", type=float)
        sp.add_argument("--out", help="trajectory CSV path")
        sp.add_argument("--report", help="run report JSON path (default: stdout)")

    r = sub.add_parser("run", help="run a scenario file")
    r.add_argument("--scenario", required=True)
    overrides(r)
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check-graph", help="connectivity, balance, spectrum and step-size diagnostics")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario")
    src.add_argument("--graph", help="JSON file holding a topology object")
    c.add_argument("--h", type=float, help="consensus gain to test against the bound")
    c.add_argument("--T", type=float, help="delta-graph window")
    c.add_argument("--delta", type=float, help="delta-graph threshold")
    c.set_defaults(func=cmd_check_graph)

    pc = sub.add_parser("paper-case", help="run built-in benchmark case 1, 2 or 3")
    pc.add_argument("case", type=int, choices=(1, 2, 3))
    pc.add_argument("--dump-scenario", action="store_true", help="print the scenario JSON and exit")
    overrides(pc)
    pc.set_defaults(func=cmd_paper_case)

    v = sub.add_parser("validate-schedule", help="check a step-size schedule against a convergence theorem")
    v.add_argument("schedule", help='JSON, e.g. \'{"type": "harmonic", "c0": 1, "c1": 0.02}\'')
    v.add_argument("--theorem", choices=("continuous", "discrete"), default="discrete")
    v.add_argument("--role", choices=("alpha", "beta"), default="alpha")
    v.add_argument("--horizon", type=int, default=5000)
    v.set_defaults(func=cmd_validate_schedule)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.func(args)
    except (CFPError, OSError, json.JSONDecodeError, ValueError) as exc:
        _err(f"error: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
