"""Runtime execution with failure injection, impact analysis, and re-planning.

The executor flies the plan leg by leg.  Arrivals at perturbed nodes deviate
from the schedule; once the deviation exceeds the detection tolerance an
episode runs: the impact horizon is sized from projected downstream delays
and upcoming congestion, a replacement fragment is composed from the current
node to the horizon, and the plan is spliced and re-propagated.  Three
response strategies share this loop: adaptive local recomposition, global
all-paths recomposition, and plain delay replication.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    LivelockError,
    RouteInfeasibleError,
    SpliceMismatchError,
    UnreachableDestinationError,
)
from .model import (
    CompositionPlan,
    DeliveryRequest,
    DroneSpec,
    PlanLeg,
    SkywayNetwork,
    release_pad,
    reserve_pad,
)
from .planner import (
    FULL_BATTERY,
    METER,
    _compose_bruteforce_full,
    _compose_lookahead_full,
    _hop,
    simulate_route,
)
from .wind import DEFAULT_ENERGY, EnergyParams, WindField

_EPS = 1e-9

#: Default detection tolerance: one minute.
DEFAULT_DETECTION_TOLERANCE_H = 1.0 / 60.0

STRATEGIES = ("adaptive", "global", "replicate")


@dataclass(frozen=True)
class FailureEvent:
    """A detected deviation between actual and scheduled arrival."""

    node_id: int | str
    expected_arrival: float
    actual_arrival: float

    @property
    def delta(self) -> float:
        return self.actual_arrival - self.expected_arrival


@dataclass(frozen=True)
class PerturbationModel:
    """Seeded runtime disturbances.

    A ``failure_rate`` fraction of nodes is perturbed: each gets an arrival
    delay drawn uniformly from [-max_early_h, +max_late_h] that triggers on
    the drone's first arrival there, plus a background occupancy block of
    ``congestion_shift_h`` hours on every pad (stochastic arrivals of other
    drones).
    """

    failure_rate: float
    max_early_h: float = 10.0 / 60.0
    max_late_h: float = 30.0 / 60.0
    congestion_shift_h: float = 0.75
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.failure_rate <= 1.0:
            raise ValueError(f"failure_rate must be in [0, 1], got {self.failure_rate}")
        if self.max_early_h < 0 or self.max_late_h < 0:
            raise ValueError("delay bounds must be >= 0")
        if self.congestion_shift_h < 0:
            raise ValueError("congestion_shift_h must be >= 0")

    @classmethod
    def none(cls) -> "PerturbationModel":
        return cls(failure_rate=0.0)


@dataclass(frozen=True)
class PlanFragment:
    """A replacement route from the current node to a rejoin point.

    ``route`` runs from the current node (inclusive) to the rejoin node;
    ``recharge_positions`` are indexes into ``route`` where a recharge is
    intended; ``rejoin_index`` is the leg position in the old plan whose
    to-node the fragment rejoins.  A single-node route is the identity
    fragment: keep the old route and just re-propagate times (delay
    replication).
    """

    route: tuple
    recharge_positions: frozenset[int]
    rejoin_index: int

    @classmethod
    def identity(cls, node, cur_index: int, recharge_here: bool = False) -> "PlanFragment":
        positions = frozenset({0}) if recharge_here else frozenset()
        return cls(route=(node,), recharge_positions=positions, rejoin_index=cur_index)

    @property
    def is_identity(self) -> bool:
        return len(self.route) == 1


@dataclass(frozen=True)
class RecompositionEpisode:
    """One detection-and-response cycle in an execution.

    ``compute_time_s`` is measured wall time of the response call;
    ``work_units`` is the deterministic planner-step count for the same call.
    """

    trigger_node: int | str
    trigger_time: float
    lookahead_depth: int
    kind: str  # adaptive | global | replicate
    adopted: str  # fragment | replication | failed
    compute_time_s: float
    work_units: int = 0


@dataclass(frozen=True)
class ExecutionTrace:
    """What actually happened: flown legs, disturbances, and responses."""

    legs: tuple[PlanLeg, ...]
    perturbed: dict
    injected: tuple
    failures: tuple[FailureEvent, ...]
    episodes: tuple[RecompositionEpisode, ...]
    final_plan: CompositionPlan
    delivered: bool
    delivery_time: float | None
    total_distance: float
    recompose_time_s: float
    recompose_work_units: int = 0
    note: str = ""


def detect_failure(expected: float, actual: float, tolerance: float) -> bool:
    """True when the arrival deviates beyond the tolerance, early or late."""
    if tolerance < 0:
        raise ValueError(f"tolerance must be >= 0, got {tolerance}")
    return abs(actual - expected) > tolerance


def project_delays(plan: CompositionPlan, cur_index: int, delta: float) -> list[float]:
    """Projected arrival shift for each remaining leg, without clamping.

    Planned waits absorb delay (they can shrink to zero); recharge durations
    cannot.  A negative value means the shift has been fully absorbed before
    that leg.
    """
    out = []
    running = delta
    for leg in plan.legs[cur_index:-1]:
        running -= leg.wait_duration
        out.append(running)
    return out


def failure_analysis(
    plan: CompositionPlan,
    cur_index: int,
    projected_delays: list[float],
    congested_nodes,
) -> int:
    """Size the recomposition horizon from the failure's reach.

    Returns min(hops to the first congested node ahead, 1 + the run of
    remaining legs whose projected delay stays >= 0), at least 1 and at most
    the remaining leg count.  With no congestion ahead the congestion term
    falls back to the full remaining distance (global impact).
    """
    remaining = len(plan.legs) - cur_index - 1
    if remaining <= 0:
        raise ValueError("failure analysis requires at least one remaining leg")
    hops_to_congestion = remaining
    for offset, leg in enumerate(plan.legs[cur_index + 1 :], start=1):
        if leg.to_node in congested_nodes:
            hops_to_congestion = offset
            break
    affected = 1
    for td in projected_delays:
        if td >= 0:
            affected += 1
        else:
            break
    return max(1, min(hops_to_congestion, affected, remaining))


def recompose(
    plan: CompositionPlan,
    cur_index: int,
    lookahead_depth: int,
    cur_time: float,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    weight: float,
    *,
    battery: float,
    depth_cap: int = 3,
    energy: EnergyParams = DEFAULT_ENERGY,
) -> PlanFragment:
    """Compose a local replacement from the current node to the horizon node.

    The first target is the planned node ``lookahead_depth`` hops ahead
    (clamped to the destination).  A target is advanced one node toward the
    destination when it is unreachable or when its fragment projects no
    improvement over simply replicating the delay; when every target fails,
    the identity fragment (delay replication) is returned.
    """
    legs = plan.legs
    if lookahead_depth < 1:
        raise ValueError(f"lookahead depth must be >= 1, got {lookahead_depth}")
    src = legs[cur_index].to_node
    last = len(legs) - 1
    replication = PlanFragment.identity(
        src, cur_index, recharge_here=legs[cur_index].recharge_duration > 0
    )
    baseline = _projected_completion(
        plan, replication, cur_index, cur_time, battery, network, drone, wind, weight, energy
    )
    for pos in range(min(cur_index + lookahead_depth, last), last + 1):
        dst = legs[pos].to_node
        if dst == src:
            continue
        request = DeliveryRequest(src, dst, weight, cur_time)
        try:
            local_plan, pre = _compose_lookahead_full(
                request,
                network,
                drone,
                wind,
                depth=min(lookahead_depth, depth_cap),
                initial_battery=battery,
                energy=energy,
                reserve=False,
            )
        except (UnreachableDestinationError, LivelockError):
            continue
        positions = {idx + 1 for idx, leg in enumerate(local_plan.legs) if leg.recharge_duration > 0}
        if pre.recharge_duration > 0:
            positions.add(0)
        fragment = PlanFragment(
            route=tuple(local_plan.node_sequence()),
            recharge_positions=frozenset(positions),
            rejoin_index=pos,
        )
        projected = _projected_completion(
            plan, fragment, cur_index, cur_time, battery, network, drone, wind, weight, energy
        )
        if projected < baseline - _EPS:
            return fragment
    return replication


def recompose_global_bruteforce(
    plan: CompositionPlan,
    cur_index: int,
    cur_time: float,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    weight: float,
    *,
    battery: float,
    node_limit: int = 12,
    energy: EnergyParams = DEFAULT_ENERGY,
    prune: bool = False,
) -> PlanFragment:
    """All-paths re-plan from the current node to the destination.

    The residual search minimizes absolute completion time (time already
    spent is sunk).  ``prune=True`` drops dominated partial paths; it never
    changes the winner and exists so experiment sweeps over larger networks
    stay tractable.  Falls back to the identity fragment when no feasible
    residual path exists; the node-limit guard propagates as
    InstanceTooLargeError.
    """
    legs = plan.legs
    src = legs[cur_index].to_node
    destination = legs[-1].to_node
    request = DeliveryRequest(src, destination, weight, cur_time)
    try:
        residual, pre = _compose_bruteforce_full(
            request,
            network,
            drone,
            wind,
            node_limit=node_limit,
            initial_battery=battery,
            energy=energy,
            reserve=False,
            objective="completion",
            prune=prune,
        )
    except UnreachableDestinationError:
        return PlanFragment.identity(
            src, cur_index, recharge_here=legs[cur_index].recharge_duration > 0
        )
    positions = {idx + 1 for idx, leg in enumerate(residual.legs) if leg.recharge_duration > 0}
    if pre.recharge_duration > 0:
        positions.add(0)
    return PlanFragment(
        route=tuple(residual.node_sequence()),
        recharge_positions=frozenset(positions),
        rejoin_index=len(legs) - 1,
    )


def _splice_route_and_hints(plan: CompositionPlan, fragment: PlanFragment, cur_index: int):
    """Remaining route (current node onward) and recharge hints after a splice."""
    legs = plan.legs
    cur_node = legs[cur_index].to_node
    if fragment.route[0] != cur_node:
        raise SpliceMismatchError(
            f"fragment starts at {fragment.route[0]}, drone is at {cur_node}"
        )
    if not cur_index <= fragment.rejoin_index < len(legs):
        raise SpliceMismatchError(f"rejoin index {fragment.rejoin_index} out of range")
    if legs[fragment.rejoin_index].to_node != fragment.route[-1]:
        raise SpliceMismatchError(
            f"fragment ends at {fragment.route[-1]}, plan node at rejoin is "
            f"{legs[fragment.rejoin_index].to_node}"
        )
    tail = legs[fragment.rejoin_index + 1 :]
    route = list(fragment.route) + [leg.to_node for leg in tail]
    hints = set(fragment.recharge_positions)
    # Old recharge intent carries over for retained tail nodes only; at the
    # rejoin node the fragment's own decision stands, since the battery it
    # arrives with may make the old stop pointless.
    base = len(fragment.route) - 1
    for offset, leg in enumerate(tail, start=1):
        if leg.recharge_duration > 0:
            hints.add(base + offset)
    return route, frozenset(hints)


def update_plan(
    plan: CompositionPlan,
    fragment: PlanFragment,
    cur_index: int,
    *,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    weight: float,
    cur_time: float | None = None,
    battery: float | None = None,
    executed_prefix: list[PlanLeg] | None = None,
    energy: EnergyParams = DEFAULT_ENERGY,
    reserve: bool = True,
) -> CompositionPlan:
    """Splice the fragment over the affected legs and re-propagate downstream.

    The retained tail is re-simulated from the fragment's end state against
    the current calendars and wind, so expected times, batteries, waits, and
    pad reservations all stay consistent; an identity fragment therefore
    replicates the current delay through the unchanged route.
    """
    legs = list(plan.legs)
    if cur_time is None:
        cur_time = legs[cur_index].arrive_time
    if battery is None:
        battery = legs[cur_index].battery_on_arrival
    route, hints = _splice_route_and_hints(plan, fragment, cur_index)
    if len(route) < 2:
        raise SpliceMismatchError("splice leaves no legs to fly")
    pre, new_legs = simulate_route(
        route,
        cur_time,
        battery,
        network,
        drone,
        wind,
        weight,
        recharge_positions=hints,
        reserve=reserve,
        energy=energy,
    )
    prefix = list(executed_prefix) if executed_prefix is not None else legs[: cur_index + 1]
    prefix[-1] = replace(
        prefix[-1],
        arrive_time=cur_time,
        wait_duration=pre.wait,
        recharge_duration=pre.recharge_duration,
        recharge_start=pre.recharge_start,
        battery_on_arrival=battery,
    )
    return CompositionPlan.from_legs(plan.drone, prefix + new_legs, network)


def _projected_completion(
    plan: CompositionPlan,
    fragment: PlanFragment,
    cur_index: int,
    cur_time: float,
    battery: float,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    weight: float,
    energy: EnergyParams,
) -> float:
    """Model completion time of a candidate splice, without touching calendars."""
    try:
        route, hints = _splice_route_and_hints(plan, fragment, cur_index)
        _, legs = simulate_route(
            route, cur_time, battery, network, drone, wind, weight,
            recharge_positions=hints, reserve=False, energy=energy,
        )
    except (SpliceMismatchError, RouteInfeasibleError):
        return math.inf
    return legs[-1].arrive_time


def _choose_perturbations(network: SkywayNetwork, request, perturbation: PerturbationModel):
    """Seeded (node -> arrival delta) map over a failure_rate share of nodes."""
    rng = np.random.default_rng(perturbation.seed)
    all_ids = network.node_ids()
    eligible = [n for n in all_ids if n != request.source]
    count = min(int(round(perturbation.failure_rate * len(all_ids))), len(eligible))
    if count <= 0:
        return {}, rng
    picked = rng.choice(len(eligible), size=count, replace=False)
    chosen = sorted((eligible[i] for i in picked), key=repr)
    deltas = {
        nid: float(rng.uniform(-perturbation.max_early_h, perturbation.max_late_h))
        for nid in chosen
    }
    return deltas, rng


def _apply_calendar_shifts(
    network: SkywayNetwork,
    plan: CompositionPlan,
    perturbed: dict,
    perturbation: PerturbationModel,
    rng,
) -> None:
    """Background occupancy blocks at perturbed nodes (other drones arriving)."""
    if perturbation.congestion_shift_h <= 0 or not perturbed:
        return
    arrivals = {leg.to_node: leg.arrive_time for leg in plan.legs}
    horizon = plan.legs[-1].arrive_time + 1.0
    duration = perturbation.congestion_shift_h
    for nid in sorted(perturbed, key=repr):
        planned = arrivals.get(nid)
        if planned is None:
            start = float(rng.uniform(0.0, horizon))
        else:
            start = max(planned - duration * float(rng.uniform(0.0, 0.5)), 0.0)
        calendar = network.calendar(nid)
        for pad in range(calendar.pad_count):
            calendar.reserve_on_pad(pad, start, duration)


def execute_resilient(
    plan: CompositionPlan,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    request,
    perturbation: PerturbationModel,
    *,
    strategy: str = "adaptive",
    detection_tolerance: float = DEFAULT_DETECTION_TOLERANCE_H,
    abort_factor: float = 3.0,
    depth_cap: int = 3,
    bf_node_limit: int = 12,
    bf_prune: bool = False,
    start_battery: float = FULL_BATTERY,
    energy: EnergyParams = DEFAULT_ENERGY,
    injected_delays: dict | None = None,
) -> ExecutionTrace:
    """Fly the plan, injecting perturbations and responding to detections.

    The caller owns the scenario state: calendars are mutated by background
    shifts, reservation swaps, and splices, so pass a fresh scenario per run.
    The plan must have been composed against this network with reservations
    committed.  ``injected_delays`` replaces the seeded perturbation draw
    with an explicit node -> delta map (no background shifts are applied).
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    weight = request.package_weight
    if injected_delays is not None:
        perturbed = dict(injected_delays)
    else:
        perturbed, rng = _choose_perturbations(network, request, perturbation)
        _apply_calendar_shifts(network, plan, perturbed, perturbation, rng)

    current = plan
    rows: list[PlanLeg] = []
    injected: list[tuple] = []
    failures: list[FailureEvent] = []
    episodes: list[RecompositionEpisode] = []
    triggered: set = set()
    recompose_time = 0.0
    recompose_units = 0
    battery = start_battery
    ready = request.start_time
    first_depart: float | None = None
    delivered = False
    note = ""
    k = 0
    while k < len(current.legs):
        leg = current.legs[k]
        i, j = leg.from_node, leg.to_node
        intent = k > 0 and current.legs[k - 1].recharge_duration > 0
        stale = current.legs[k - 1] if k > 0 else None
        if stale is not None and stale.recharge_start is not None:
            try:
                release_pad(network.calendar(i), stale.recharge_start, stale.recharge_duration)
            except KeyError:
                pass  # slot displaced by background traffic
        hop = _hop(
            network, drone, wind, weight, i, j, ready, battery,
            recharge_first=intent and battery < FULL_BATTERY - _EPS, energy=energy,
        )
        if hop is None and battery < FULL_BATTERY - _EPS:
            hop = _hop(
                network, drone, wind, weight, i, j, ready, battery,
                recharge_first=True, energy=energy,
            )
        if hop is None:
            note = f"stuck at node {i}: segment {i}-{j} cannot be flown"
            break
        if hop.recharge_duration > 0:
            reserve_pad(network.calendar(i), hop.recharge_start, hop.recharge_duration)
        if rows:
            idle = max(hop.depart - rows[-1].arrive_time - hop.recharge_duration, 0.0)
            rows[-1] = replace(
                rows[-1],
                wait_duration=idle,
                recharge_duration=hop.recharge_duration,
                recharge_start=hop.recharge_start,
            )
        if first_depart is None:
            first_depart = hop.depart
        delta = 0.0
        if j in perturbed and j not in triggered:
            triggered.add(j)
            delta = perturbed[j]
            injected.append((j, delta))
        actual = max(hop.arrive + delta, hop.depart + 1e-6)
        battery = hop.battery_after
        rows.append(
            PlanLeg(
                from_node=i,
                to_node=j,
                depart_time=hop.depart,
                arrive_time=actual,
                battery_on_arrival=battery,
            )
        )
        if k == len(current.legs) - 1:
            delivered = True
            break
        if actual - first_depart > abort_factor * plan.total_delivery_time:
            note = "abort horizon exceeded"
            break
        ready = actual
        if detect_failure(leg.arrive_time, actual, detection_tolerance):
            failures.append(FailureEvent(j, leg.arrive_time, actual))
            for later in current.legs[k:]:
                if later.recharge_start is not None:
                    try:
                        release_pad(
                            network.calendar(later.to_node),
                            later.recharge_start,
                            later.recharge_duration,
                        )
                    except KeyError:
                        pass  # slot displaced by background traffic
            delta_obs = actual - leg.arrive_time
            projected = project_delays(current, k, delta_obs)
            congested = set()
            for offset, later in enumerate(current.legs[k + 1 :]):
                probe = later.arrive_time + max(projected[offset], 0.0)
                if network.calendar(later.to_node).is_congested(probe):
                    congested.add(later.to_node)
            depth = failure_analysis(current, k, projected, congested)
            started = time.perf_counter()
            units_before = METER.snapshot()
            if strategy == "adaptive":
                fragment = recompose(
                    current, k, depth, actual, network, drone, wind, weight,
                    battery=battery, depth_cap=depth_cap, energy=energy,
                )
            elif strategy == "global":
                fragment = recompose_global_bruteforce(
                    current, k, actual, network, drone, wind, weight,
                    battery=battery, node_limit=bf_node_limit, energy=energy,
                    prune=bf_prune,
                )
            else:
                fragment = PlanFragment.identity(
                    j, k, recharge_here=current.legs[k].recharge_duration > 0
                )
            elapsed = time.perf_counter() - started
            units = METER.snapshot() - units_before
            recompose_time += elapsed
            recompose_units += units
            try:
                current = update_plan(
                    current, fragment, k,
                    network=network, drone=drone, wind=wind, weight=weight,
                    cur_time=actual, battery=battery,
                    executed_prefix=rows, energy=energy, reserve=True,
                )
            except RouteInfeasibleError:
                note = f"re-propagation infeasible after failure at {j}"
                episodes.append(
                    RecompositionEpisode(j, actual, depth, strategy, "failed", elapsed, units)
                )
                break
            episodes.append(
                RecompositionEpisode(
                    j,
                    actual,
                    depth,
                    strategy,
                    "replication" if fragment.is_identity else "fragment",
                    elapsed,
                    units,
                )
            )
            k = len(rows)
            continue
        k += 1

    total_distance = sum(
        network.segment(r.from_node, r.to_node).distance for r in rows
    )
    delivery_time = rows[-1].arrive_time - first_depart if delivered and rows else None
    return ExecutionTrace(
        legs=tuple(rows),
        perturbed=perturbed,
        injected=tuple(injected),
        failures=tuple(failures),
        episodes=tuple(episodes),
        final_plan=current,
        delivered=delivered,
        delivery_time=delivery_time,
        total_distance=total_distance,
        recompose_time_s=recompose_time,
        recompose_work_units=recompose_units,
        note=note,
    )
