"""Experiment orchestration: run algorithm/failure-rate grids, export CSV.

Every cell runs a fixed number of seeded deliveries; seeds derive from the
campaign seed, node count, and run index only, so all algorithms in a cell
row face identical scenarios and perturbations (paired comparison).  The
exported computation metric converts deterministic planner work units to
nominal seconds, keeping output bytes reproducible.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, SkywayError
from .model import CompositionPlan
from .planner import METER, compose_bruteforce, compose_greedy, compose_lookahead
from .resilience import ExecutionTrace, PerturbationModel, execute_resilient
from .scenario import Scenario, ScenarioConfig, generate_scenario
from .skyline import select_drone

#: Nominal wall seconds per planner work unit; keeps the exported
#: computation column deterministic while staying proportional to real cost.
SECONDS_PER_WORK_UNIT = 2.5e-6

PLANNERS = ("lookahead", "greedy", "bruteforce")

#: Runtime response paired with each planner when none is given explicitly.
DEFAULT_STRATEGY = {
    "lookahead": "adaptive",
    "greedy": "replicate",
    "bruteforce": "global",
}


@dataclass(frozen=True)
class MetricsRecord:
    """Aggregated cell metrics over the completed runs."""

    algorithm: str
    node_count: int
    failure_rate: float
    avg_delivery_time_h: float
    avg_computation_time_s: float
    avg_distance_km: float
    runs: int


@dataclass(frozen=True)
class ExperimentConfig:
    """A campaign: the scenario template plus the grid to sweep."""

    base: ScenarioConfig
    node_counts: tuple[int, ...] = (20,)
    algorithms: tuple[str, ...] = ("lookahead", "greedy")
    failure_rates: tuple[float, ...] = (0.0, 0.2)
    runs_per_point: int | None = None
    bf_node_limit: int = 12
    lookahead_depth: int = 1

    def __post_init__(self):
        for name in self.algorithms:
            parse_algorithm(name)
        if not self.node_counts:
            raise ConfigError("node_counts must be non-empty")
        if not self.failure_rates:
            raise ConfigError("failure_rates must be non-empty")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        try:
            scenario_doc = dict(doc.get("scenario", {}))
            scenario_doc.setdefault("seed", doc.get("seed", 0))
            base = ScenarioConfig(**scenario_doc)
            return cls(
                base=base,
                node_counts=tuple(doc.get("node_counts", (base.node_count,))),
                algorithms=tuple(doc.get("algorithms", ("lookahead", "greedy"))),
                failure_rates=tuple(doc.get("failure_rates", (0.0, 0.2))),
                runs_per_point=doc.get("runs_per_point"),
                bf_node_limit=doc.get("bf_node_limit", 12),
                lookahead_depth=doc.get("lookahead_depth", 1),
            )
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed experiment config: {exc}") from exc

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"experiment config is not valid JSON: {exc}") from exc
        return cls.from_dict(doc)


def parse_algorithm(name: str) -> tuple[str, str]:
    """Split "planner" or "planner+strategy" into its parts.

    Bare planner names pair with their conventional runtime response:
    lookahead+adaptive, greedy+replicate, bruteforce+global.
    """
    base, _, strategy = name.partition("+")
    if base not in PLANNERS:
        raise ConfigError(f"unknown planner {base!r}; expected one of {PLANNERS}")
    if strategy and strategy not in ("adaptive", "global", "replicate"):
        raise ConfigError(f"unknown strategy {strategy!r}")
    return base, strategy or DEFAULT_STRATEGY[base]


@dataclass(frozen=True)
class DeliveryResult:
    """One full pipeline run: offline plan plus executed trace."""

    plan: CompositionPlan
    trace: ExecutionTrace
    plan_time_s: float
    plan_work_units: int

    @property
    def computation_seconds(self) -> float:
        """Deterministic computation metric for plan plus recompositions."""
        units = self.plan_work_units + self.trace.recompose_work_units
        return units * SECONDS_PER_WORK_UNIT

    @property
    def wall_seconds(self) -> float:
        return self.plan_time_s + self.trace.recompose_time_s


def run_delivery(
    scenario: Scenario,
    algorithm: str,
    *,
    depth: int = 1,
    bf_node_limit: int = 12,
    bf_prune: bool = True,
    abort_factor: float = 3.0,
    perturbation: PerturbationModel | None = None,
) -> DeliveryResult:
    """Select a drone, compose the initial plan, and execute it resiliently.

    The harness prunes the brute-force searches by default (identical plans,
    far less work); pass ``bf_prune=False`` for the literal enumeration.
    """
    planner_name, strategy = parse_algorithm(algorithm)
    drone, _ = select_drone(scenario.drones, scenario.request.package_weight)
    units_before = METER.snapshot()
    started = time.perf_counter()
    if planner_name == "lookahead":
        plan = compose_lookahead(
            scenario.request, scenario.network, drone, scenario.wind,
            depth=depth, energy=scenario.energy,
        )
    elif planner_name == "greedy":
        plan = compose_greedy(
            scenario.request, scenario.network, drone, scenario.wind,
            energy=scenario.energy,
        )
    else:
        plan = compose_bruteforce(
            scenario.request, scenario.network, drone, scenario.wind,
            node_limit=bf_node_limit, energy=scenario.energy, prune=bf_prune,
        )
    plan_time = time.perf_counter() - started
    plan_units = METER.snapshot() - units_before
    trace = execute_resilient(
        plan,
        scenario.network,
        drone,
        scenario.wind,
        scenario.request,
        perturbation if perturbation is not None else scenario.perturbation,
        strategy=strategy,
        bf_node_limit=bf_node_limit,
        bf_prune=bf_prune,
        abort_factor=abort_factor,
        energy=scenario.energy,
    )
    return DeliveryResult(plan, trace, plan_time, plan_units)


def _derived_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def run_experiment(
    config: ExperimentConfig,
    algorithms: list[str] | None = None,
    failure_rates: list[float] | None = None,
    *,
    annotations: list | None = None,
) -> list[MetricsRecord]:
    """Run every (algorithm, node_count, failure_rate) cell of the grid.

    Within a cell row, run ``i`` uses the same scenario and perturbation for
    every algorithm.  Failed runs (unreachable, oversized, undelivered) are
    skipped and, when ``annotations`` is given, reported there as
    (algorithm, node_count, failure_rate, run_index, message) tuples.
    """
    algorithms = list(algorithms if algorithms is not None else config.algorithms)
    failure_rates = list(failure_rates if failure_rates is not None else config.failure_rates)
    for name in algorithms:
        parse_algorithm(name)
    records = []
    for algorithm in algorithms:
        for node_count in config.node_counts:
            runs = (
                config.runs_per_point
                if config.runs_per_point is not None
                else max(1, round(0.10 * node_count))
            )
            for rate in failure_rates:
                delivery_times = []
                computation_times = []
                distances = []
                for run_idx in range(runs):
                    scenario_seed = _derived_seed(config.base.seed, node_count, run_idx)
                    perturb_seed = _derived_seed(
                        config.base.seed, node_count, run_idx, int(round(rate * 1000)), 7
                    )
                    cell_config = replace(
                        config.base,
                        node_count=node_count,
                        seed=scenario_seed,
                        failure_rate=rate,
                    )
                    scenario = generate_scenario(cell_config)
                    model = cell_config.perturbation(perturb_seed)
                    try:
                        result = run_delivery(
                            scenario,
                            algorithm,
                            depth=config.lookahead_depth,
                            bf_node_limit=config.bf_node_limit,
                            perturbation=model,
                        )
                    except SkywayError as exc:
                        if annotations is not None:
                            annotations.append(
                                (algorithm, node_count, rate, run_idx, f"{type(exc).__name__}: {exc}")
                            )
                        continue
                    if not result.trace.delivered:
                        if annotations is not None:
                            annotations.append(
                                (algorithm, node_count, rate, run_idx,
                                 f"delivery-failure: {result.trace.note}")
                            )
                        continue
                    delivery_times.append(result.trace.delivery_time)
                    computation_times.append(result.computation_seconds)
                    distances.append(result.trace.total_distance)
                if not delivery_times:
                    if annotations is not None:
                        annotations.append(
                            (algorithm, node_count, rate, None, "no completed runs")
                        )
                    continue
                count = len(delivery_times)
                records.append(
                    MetricsRecord(
                        algorithm=algorithm,
                        node_count=node_count,
                        failure_rate=rate,
                        avg_delivery_time_h=sum(delivery_times) / count,
                        avg_computation_time_s=sum(computation_times) / count,
                        avg_distance_km=sum(distances) / count,
                        runs=count,
                    )
                )
    return records


def export_metrics(records: list[MetricsRecord], path) -> None:
    """Write the metrics CSV: sorted rows, 6 significant digits."""
    ordered = sorted(records, key=lambda r: (r.algorithm, r.node_count, r.failure_rate))
    lines = ["algorithm,node_count,failure_rate,avg_delivery_time_h,avg_computation_time_s,avg_distance_km,runs"]
    for rec in ordered:
        lines.append(
            f"{rec.algorithm},{rec.node_count},{rec.failure_rate:.6g},"
            f"{rec.avg_delivery_time_h:.6g},{rec.avg_computation_time_s:.6g},"
            f"{rec.avg_distance_km:.6g},{rec.runs}"
        )
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
