"""Command-line entry point.

Commands::

    tvmcf solve  [--config c.json] [--k K] [--T T] [--seed S] [--paths] [--export-lp model.lp]
    tvmcf sweep  [--config c.json] --out DIR [--timings]
    tvmcf export [--config c.json] --out model.lp
    tvmcf gen    [--config c.json] --out topology.json

Flags override the matching config values. ``solve``, ``export`` and ``gen``
build a single instance: trial 0 of the first k value at the largest T of
the grid, unless ``--k`` or ``--T`` say otherwise.

Exit status: 0 on success, 1 on invalid input, 2 when a solver runs out of
a configured resource.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .analysis import rows_to_csv, run_experiment, sample_commodities, trial_seed
from .config import ConfigSyntaxError, ExperimentGrid, parse_config
from .constellation import ConfigError, generate_network
from .joint import DEMAND_MODES, JointModelParams, build_joint, solve_epsilon, step_maxima
from .lp import ModelError, SolverResourceError, export_lp_text
from .mcf import ROUTING_MODES, FlowSolution, decompose_paths

EXIT_OK, EXIT_INVALID, EXIT_RESOURCE = 0, 1, 2


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for resource errors here.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tvmcf", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON grid configuration (defaults apply when omitted)")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--k", type=int, help="override k_values with a single value")
        p.add_argument("--T", type=int, help="override T_values with a single value")
        p.add_argument("--demand-mode", choices=DEMAND_MODES)
        p.add_argument("--routing-mode", choices=ROUTING_MODES)

    p = sub.add_parser("solve", help="solve one joint instance and print a summary")
    common(p)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--paths", action="store_true", help="list per-step path decompositions")
    p.add_argument("--export-lp", metavar="FILE", help="also write the joint model in LP format")

    p = sub.add_parser("sweep", help="run the experiment grid and write table.csv")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--timings", action="store_true",
                   help="fill runtime_ms (makes the CSV differ between runs)")

    p = sub.add_parser("export", help="write the joint model of one instance in LP format")
    common(p)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("gen", help="write the generated network as a JSON topology dump")
    common(p)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def load_grid(args) -> ExperimentGrid:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            grid = parse_config(fh.read())
    else:
        grid = ExperimentGrid()
    changes = {}
    if args.seed is not None:
        changes["master_seed"] = args.seed
    if args.k is not None:
        changes["k_values"] = (args.k,)
    if args.T is not None:
        changes["T_values"] = (args.T,)
    if args.demand_mode is not None:
        changes["demand_mode"] = args.demand_mode
    if args.routing_mode is not None:
        changes["routing_mode"] = args.routing_mode
    return grid.with_(**changes) if changes else grid


def _instance(grid: ExperimentGrid, trial: int):
    if trial < 0:
        raise UsageError("--trial must be >= 0")
    k = grid.k_values[0]
    seed = trial_seed(grid.master_seed, k, trial)
    network = generate_network(grid.base.with_(T=grid.T_max, seed=seed))
    return network, sample_commodities(grid, k, seed), seed


def _params(grid: ExperimentGrid) -> JointModelParams:
    return JointModelParams(demand_mode=grid.demand_mode, routing_mode=grid.routing_mode)


def _write(path: str, text: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_solve(grid: ExperimentGrid, args, out) -> None:
    network, commodities, seed = _instance(grid, args.trial)
    params = _params(grid)
    maxtp = step_maxima(network, commodities)
    res = solve_epsilon(network, commodities, params, maxtp)
    print(f"k={len(commodities)} T={network.T} seed={seed}", file=out)
    for c in commodities:
        print(f"commodity {c.index}: {c.source} -> {c.sink} demand={c.demand:g}", file=out)
    print(f"epsilon={res.epsilon:.6f}", file=out)
    for j in range(network.T):
        ratio = "n/a" if res.ratios[j] is None else f"{res.ratios[j]:.6f}"
        print(f"step {j}: maxtp={res.maxtp[j]:.6f} achieved={res.achieved[j]:.6f} ratio={ratio}", file=out)
    for note in res.notes:
        print(f"note: {note}", file=out)
    if args.paths:
        for j in range(network.T):
            sol = FlowSolution(res.flows[j], res.delivered[j])
            for c in commodities:
                for path, amount in decompose_paths(sol, c):
                    print(f"step {j} commodity {c.index}: {'-'.join(map(str, path))} x {amount:.6f}",
                          file=out)
    if args.export_lp:
        _write(args.export_lp, export_lp_text(build_joint(network, commodities, maxtp, params)))


def cmd_sweep(grid: ExperimentGrid, args, out) -> int:
    report = run_experiment(grid, timings=args.timings)
    path = os.path.join(args.out, "table.csv")
    _write(path, rows_to_csv(report.rows))
    print(f"wrote {len(report.rows)} rows to {path}", file=out)
    for f in report.failures:
        print(f"cell k={f.k} T={f.T} trial={f.trial} failed: {f.error}", file=sys.stderr)
    if any("SolverResourceError" in f.error for f in report.failures):
        return EXIT_RESOURCE
    return EXIT_INVALID if report.failures else EXIT_OK


def cmd_export(grid: ExperimentGrid, args, out) -> None:
    network, commodities, _ = _instance(grid, args.trial)
    maxtp = step_maxima(network, commodities)
    _write(args.out, export_lp_text(build_joint(network, commodities, maxtp, _params(grid))))
    print(f"wrote {args.out}", file=out)


def cmd_gen(grid: ExperimentGrid, args, out) -> None:
    network, _, _ = _instance(grid, args.trial)
    _write(args.out, network.to_json())
    print(f"wrote {args.out}", file=out)


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        grid = load_grid(args)
        if args.command == "solve":
            cmd_solve(grid, args, out)
        elif args.command == "sweep":
            return cmd_sweep(grid, args, out)
        elif args.command == "export":
            cmd_export(grid, args, out)
        elif args.command == "gen":
            cmd_gen(grid, args, out)
    except SolverResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConfigSyntaxError, ConfigError, ModelError, UsageError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
