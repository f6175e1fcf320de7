"""Command-line entry points.

  beamsched solve      --network NET.json --objective capacity|worst:K|average|feasible:R
  beamsched tradeoff   --network NET.json --k MAX_FAILURES
  beamsched select     --network NET.json [--k MIN_COUNT]
  beamsched experiment --config CONFIG.json --seed S --out-dir DIR
  beamsched serve      --config ENV.json --endpoint tcp:HOST:PORT|stdio

Commands that write files drop a manifest.json tying every output to the
command, config digest, and seed that produced it.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import __version__
from .env import load_env_config
from .experiment import default_config, load_experiment_config, run_experiment
from .network import enumerate_paths, load_network, paths_to_doc
from .rates import (
    PatternBudgetError,
    approx_capacity,
    feasibility_schedule,
    optimal_average,
    optimal_worst_case,
    schedule_to_csv,
    tradeoff_curve,
    tradeoff_to_csv,
)
from .selection import build_candidate_paths, select_paths
from .server import serve_stdio, serve_tcp


def _digest(filename: str) -> str:
    with open(filename, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _write_manifest(out_dir: str, command: str, digest: str, seed, outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "config_digest": digest,
        "seed": seed,
        "version": __version__,
        "outputs": sorted(outputs),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


def _load_paths(args) -> tuple:
    network = load_network(args.network)
    enum = enumerate_paths(network, args.max_paths)
    if enum.truncated:
        print(f"warning: path enumeration truncated at {args.max_paths}", file=sys.stderr)
    return network, enum.paths


def cmd_solve(args) -> int:
    network, paths = _load_paths(args)
    objective = args.objective
    try:
        if objective == "capacity":
            sol = approx_capacity(network, paths)
        elif objective == "average":
            sol = optimal_average(network, paths)
        elif objective.startswith("worst:"):
            sol = optimal_worst_case(network, paths, int(objective.split(":", 1)[1]))
        elif objective.startswith("feasible:"):
            sol = feasibility_schedule(network, paths, float(objective.split(":", 1)[1]))
        else:
            print(f"unknown objective {objective!r}", file=sys.stderr)
            return 2
    except PatternBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    if sol.status != "optimal":
        print(sol.status)
        return 1
    print(f"objective {objective} value {sol.value:.10g}")
    for i, (path, x) in enumerate(zip(sol.paths, sol.fractions)):
        if x > 1e-9:
            print(f"  path {i} [{path}] x={x:.10g}")
    if sol.worst_pattern:
        print(f"  tight pattern: {sorted(sol.worst_pattern)}")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "schedule.csv"), "w", encoding="utf-8") as fh:
            fh.write(schedule_to_csv(sol.paths, sol.fractions))
        _write_manifest(args.out_dir, "solve", _digest(args.network), None, ["schedule.csv"])
    return 0


def cmd_tradeoff(args) -> int:
    network, paths = _load_paths(args)
    try:
        entries = tradeoff_curve(network, paths, args.k)
    except PatternBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    csv = tradeoff_to_csv(entries)
    print(csv, end="")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        with open(os.path.join(args.out_dir, "tradeoff.csv"), "w", encoding="utf-8") as fh:
            fh.write(csv)
        _write_manifest(args.out_dir, "tradeoff", _digest(args.network), None, ["tradeoff.csv"])
    return 0


def cmd_select(args) -> int:
    network = load_network(args.network)
    pool = select_paths(network)
    print(f"selected pool ({len(pool)} paths):")
    for p in pool:
        print(f"  {p}")
    selection = build_candidate_paths(network, [None], 5e-5, args.k)
    print(f"candidate set ({len(selection.paths)} paths"
          f"{', short of the requested minimum' if selection.shortfall else ''}):")
    for p in selection.paths:
        print(f"  {p}")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        outputs = []
        for name, paths in (("paths_pool.json", pool), ("paths_candidates.json", selection.paths)):
            with open(os.path.join(args.out_dir, name), "w", encoding="utf-8") as fh:
                json.dump(paths_to_doc(paths), fh, indent=2)
                fh.write("\n")
            outputs.append(name)
        _write_manifest(args.out_dir, "select", _digest(args.network), None, outputs)
    return 0


def cmd_experiment(args) -> int:
    if args.config:
        config = load_experiment_config(args.config)
        digest = _digest(args.config)
    else:
        config = default_config()
        digest = hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()
    run_experiment(config, args.seed, args.out_dir)
    print(f"experiment outputs in {args.out_dir}")
    return 0


def cmd_serve(args) -> int:
    config = load_env_config(args.config)
    if args.seed is not None:
        from dataclasses import replace

        config = replace(config, seed=args.seed)
    if args.endpoint == "stdio":
        serve_stdio(config)
        return 0
    if args.endpoint.startswith("tcp:"):
        _, host, port = args.endpoint.split(":")
        serve_tcp(config, host, int(port))
        return 0
    print(f"unknown endpoint {args.endpoint!r}; use tcp:HOST:PORT or stdio", file=sys.stderr)
    return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beamsched", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="optimize a rate objective over a network file")
    solve.add_argument("--network", required=True)
    solve.add_argument("--objective", required=True,
                       help="capacity | worst:K | average | feasible:R")
    solve.add_argument("--max-paths", type=int, default=100_000)
    solve.add_argument("--out-dir")
    solve.set_defaults(func=cmd_solve)

    tradeoff = sub.add_parser("tradeoff", help="resilience/packet-rate trade-off table")
    tradeoff.add_argument("--network", required=True)
    tradeoff.add_argument("--k", type=int, required=True, help="largest failure budget")
    tradeoff.add_argument("--max-paths", type=int, default=100_000)
    tradeoff.add_argument("--out-dir")
    tradeoff.set_defaults(func=cmd_tradeoff)

    select = sub.add_parser("select", help="heuristic path pool and candidate set")
    select.add_argument("--network", required=True)
    select.add_argument("--k", type=int, default=10, help="minimum candidate count")
    select.add_argument("--out-dir")
    select.set_defaults(func=cmd_select)

    experiment = sub.add_parser("experiment", help="generate instances, run baselines")
    experiment.add_argument("--config", help="experiment config JSON (defaults built in)")
    experiment.add_argument("--seed", type=int, required=True)
    experiment.add_argument("--out-dir", required=True)
    experiment.set_defaults(func=cmd_experiment)

    serve = sub.add_parser("serve", help="expose an environment over the wire protocol")
    serve.add_argument("--config", required=True, help="environment config JSON")
    serve.add_argument("--endpoint", default="tcp:127.0.0.1:5555")
    serve.add_argument("--seed", type=int, help="override the config seed")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
