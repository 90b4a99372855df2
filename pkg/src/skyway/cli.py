"""Command-line interface: skyline, plan, simulate, experiment, generate."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace

from .errors import ConfigError, InstanceTooLargeError, SkywayError
from .experiment import (
    ExperimentConfig,
    export_metrics,
    parse_algorithm,
    run_delivery,
    run_experiment,
)
from .resilience import PerturbationModel
from .scenario import ScenarioConfig, generate_scenario, load_catalog, load_scenario, save_scenario
from .skyline import bnl_skyline, payload_filter
from .model import validate_plan


def _env_seed() -> int | None:
    raw = os.environ.get("SKYWAY_SEED")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"SKYWAY_SEED must be an integer, got {raw!r}") from exc


def _print_plan(plan, out=sys.stdout):
    print("leg,from,to,depart_h,arrive_h,wait_h,recharge_h,battery_pct", file=out)
    for idx, leg in enumerate(plan.legs, start=1):
        print(
            f"{idx},{leg.from_node},{leg.to_node},{leg.depart_time:.4f},"
            f"{leg.arrive_time:.4f},{leg.wait_duration:.4f},"
            f"{leg.recharge_duration:.4f},{leg.battery_on_arrival:.1f}",
            file=out,
        )
    print(
        f"summary: drone={plan.drone} legs={len(plan.legs)} "
        f"delivery_time_h={plan.total_delivery_time:.4f} "
        f"distance_km={plan.total_distance:.3f}",
        file=out,
    )


def _cmd_skyline(args) -> int:
    catalog = load_catalog(args.catalog)
    candidates = payload_filter(catalog, args.weight) if args.weight else list(catalog)
    result = bnl_skyline(candidates)
    width = max(len(d.id) for d in candidates)
    print(f"{'drone':<{width}}  {'time_min':>8}  {'range_km':>8}  {'recharge_h':>10}  skyline")
    for drone in sorted(candidates, key=lambda d: d.id):
        mark = "yes" if drone.id in result.skyline else "no"
        print(
            f"{drone.id:<{width}}  {drone.flight_time:>8.1f}  {drone.flight_range:>8.1f}  "
            f"{drone.recharge_time_full:>10.2f}  {mark}"
        )
    print("id,is_skyline,witness")
    for drone in sorted(candidates, key=lambda d: d.id):
        witness = result.dominated.get(drone.id, "")
        print(f"{drone.id},{str(drone.id in result.skyline).lower()},{witness}")
    return 0


def _cmd_plan(args) -> int:
    scenario = load_scenario(args.scenario)
    result = run_delivery(
        scenario,
        args.algo,
        depth=args.depth,
        bf_node_limit=args.bf_node_limit,
        perturbation=PerturbationModel.none(),
    )
    plan = result.plan
    issues = validate_plan(plan, scenario.network, scenario.request)
    if issues:
        print("plan invalid: " + "; ".join(issues), file=sys.stderr)
        return 1
    _print_plan(plan)
    return 0


def _cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    seed = args.seed if args.seed is not None else _env_seed()
    model = scenario.perturbation
    if args.failure_rate is not None:
        model = replace(model, failure_rate=args.failure_rate)
    if seed is not None:
        model = replace(model, seed=seed)
    algorithm = f"lookahead+{args.strategy}"
    result = run_delivery(
        scenario,
        algorithm,
        depth=args.depth,
        bf_node_limit=args.bf_node_limit,
        perturbation=model,
    )
    trace = result.trace
    print("leg,from,to,depart_h,arrive_h,wait_h,recharge_h,battery_pct,injected_h")
    injected = dict(trace.injected)
    for idx, leg in enumerate(trace.legs, start=1):
        print(
            f"{idx},{leg.from_node},{leg.to_node},{leg.depart_time:.4f},"
            f"{leg.arrive_time:.4f},{leg.wait_duration:.4f},"
            f"{leg.recharge_duration:.4f},{leg.battery_on_arrival:.1f},"
            f"{injected.get(leg.to_node, 0.0):.4f}"
        )
    per_episode = (
        trace.recompose_time_s / len(trace.episodes) if trace.episodes else 0.0
    )
    status = "delivered" if trace.delivered else f"failed ({trace.note})"
    delivery = f"{trace.delivery_time:.4f}" if trace.delivery_time is not None else "n/a"
    print(
        f"summary: {status} delivery_time_h={delivery} "
        f"distance_km={trace.total_distance:.3f} failures={len(trace.failures)} "
        f"recompositions={len(trace.episodes)} "
        f"compute_per_recomposition_s={per_episode:.6f}"
    )
    return 0


def _cmd_experiment(args) -> int:
    config = ExperimentConfig.from_file(args.config)
    seed = args.seed if args.seed is not None else _env_seed()
    if seed is not None:
        config = replace(config, base=replace(config.base, seed=seed))
    annotations: list = []
    records = run_experiment(config, annotations=annotations)
    export_metrics(records, args.out)
    for note in annotations:
        print(f"note: cell {note[:4]} -> {note[4]}", file=sys.stderr)
    print(f"wrote {len(records)} rows to {args.out}")
    return 0


def _cmd_generate(args) -> int:
    seed = args.seed if args.seed is not None else (_env_seed() or 0)
    config = ScenarioConfig(
        node_count=args.nodes,
        pads_per_node=args.pads,
        drone_count=args.drones,
        failure_rate=args.failure_rate,
        seed=seed,
    )
    scenario = generate_scenario(config)
    save_scenario(scenario, args.out)
    print(
        f"wrote scenario to {args.out}: {args.nodes} nodes, "
        f"{len(scenario.network.segments())} segments, "
        f"request {scenario.request.source} -> {scenario.request.destination}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skyway",
        description="Plan, simulate, and re-plan drone deliveries over a skyway network.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sky = sub.add_parser("skyline", help="drone selection over a catalog file")
    p_sky.add_argument("--catalog", required=True)
    p_sky.add_argument("--weight", type=float, default=None, help="filter by package weight (kg)")
    p_sky.set_defaults(func=_cmd_skyline)

    p_plan = sub.add_parser("plan", help="offline composition for a scenario file")
    p_plan.add_argument("--scenario", required=True)
    p_plan.add_argument("--algo", default="lookahead", choices=["lookahead", "greedy", "bruteforce"])
    p_plan.add_argument("--depth", type=int, default=1)
    p_plan.add_argument("--bf-node-limit", type=int, default=12)
    p_plan.set_defaults(func=_cmd_plan)

    p_sim = sub.add_parser("simulate", help="execute a plan under perturbations")
    p_sim.add_argument("--scenario", required=True)
    p_sim.add_argument("--failure-rate", type=float, default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--strategy", default="adaptive", choices=["adaptive", "global", "replicate"])
    p_sim.add_argument("--depth", type=int, default=1)
    p_sim.add_argument("--bf-node-limit", type=int, default=12)
    p_sim.set_defaults(func=_cmd_simulate)

    p_exp = sub.add_parser("experiment", help="run a metrics campaign to CSV")
    p_exp.add_argument("--config", required=True)
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--seed", type=int, default=None)
    p_exp.set_defaults(func=_cmd_experiment)

    p_gen = sub.add_parser("generate", help="write a seeded scenario file")
    p_gen.add_argument("--nodes", type=int, default=20)
    p_gen.add_argument("--pads", type=int, default=5)
    p_gen.add_argument("--drones", type=int, default=50)
    p_gen.add_argument("--failure-rate", type=float, default=0.2)
    p_gen.add_argument("--seed", type=int, default=None)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=_cmd_generate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InstanceTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SkywayError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
