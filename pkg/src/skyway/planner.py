"""Offline composition of delivery plans over the skyway network.

Three composers share one action model (travel to a neighbor, recharge at
the current station, wait out hostile wind):

* :func:`compose_lookahead` expands the state tree a configurable number of
  levels past the immediate children before committing each action; waiting
  time shows up inside branches through the pad calendars, so a branch that
  runs into a congested station scores worse than a slightly longer detour.
* :func:`compose_greedy` always flies the shortest segment that makes
  progress toward the destination, recharging only when forced.
* :func:`compose_bruteforce` enumerates every simple path (and every
  recharge-or-not decision along it) and returns the fastest simulated plan;
  it is the ground-truth baseline and is guarded by a node limit.
"""

from __future__ import annotations

import heapq
import math
from collections import Counter
from dataclasses import dataclass, replace

from .errors import (
    DeadEndError,
    InstanceTooLargeError,
    LivelockError,
    RouteInfeasibleError,
    UnreachableDestinationError,
    WindInfeasibleError,
)
from .model import (
    CompositionPlan,
    DeliveryRequest,
    DroneSpec,
    PlanLeg,
    SkywayNetwork,
    next_pad_available,
    reserve_pad,
)
from .wind import DEFAULT_ENERGY, EnergyParams, WindField, ground_speed, travel_time

FULL_BATTERY = 100.0
_EPS = 1e-9


class WorkMeter:
    """Deterministic counter of elementary planning steps.

    Incremented by state expansion and hop simulation; experiment reports
    derive a reproducible computation metric from it, since wall-clock times
    can never be byte-stable across runs.
    """

    __slots__ = ("units",)

    def __init__(self):
        self.units = 0

    def snapshot(self) -> int:
        return self.units


METER = WorkMeter()


@dataclass(frozen=True)
class State:
    """Search-tree node: where the drone is, when, and with what resources."""

    node_id: int | str
    timestamp: float
    battery: float
    accumulated_distance: float = 0.0


@dataclass(frozen=True)
class TravelAction:
    to_node: int | str
    depart_time: float
    arrive_time: float
    distance: float
    battery_after: float


@dataclass(frozen=True)
class RechargeAction:
    wait_duration: float
    recharge_duration: float
    recharge_start: float


@dataclass(frozen=True)
class WindWaitAction:
    until: float


Action = TravelAction | RechargeAction | WindWaitAction

_ACTION_RANK = {TravelAction: 0, RechargeAction: 1, WindWaitAction: 2}


def _recharge_duration(battery: float, drone: DroneSpec) -> float:
    """Hours to charge from ``battery`` back to full (linear in the deficit)."""
    return (FULL_BATTERY - battery) / FULL_BATTERY * drone.recharge_time_full


def expand(
    state: State,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    weight: float,
    *,
    energy: EnergyParams = DEFAULT_ENERGY,
) -> list[tuple[Action, State]]:
    """Successor actions of ``state``.

    Travel children exist for each neighbor that is wind-flyable right now
    and within the current battery.  A recharge child (wait for a pad, then
    charge to full) exists unless the battery is already full.  A wind-wait
    child to the next wind epoch exists only when at least one adjacent
    segment is currently wind-blocked.  Raises DeadEndError when no action
    is available.
    """
    children: list[tuple[Action, State]] = []
    sample = wind.at(state.timestamp)
    wind_blocked = False
    METER.units += 1 + len(network.neighbors(state.node_id))
    for j in network.neighbors(state.node_id):
        seg = network.segment(state.node_id, j)
        try:
            kin = ground_speed(drone.speed, sample, seg.bearing_from(state.node_id))
        except WindInfeasibleError:
            wind_blocked = True
            continue
        need = energy.consumed(seg.distance, weight, kin)
        if need > state.battery + _EPS:
            continue
        arrive = state.timestamp + travel_time(seg.distance, kin)
        after = max(state.battery - need, 0.0)
        children.append(
            (
                TravelAction(j, state.timestamp, arrive, seg.distance, after),
                State(j, arrive, after, state.accumulated_distance + seg.distance),
            )
        )
    if state.battery < FULL_BATTERY - _EPS:
        duration = _recharge_duration(state.battery, drone)
        start = next_pad_available(network.calendar(state.node_id), state.timestamp, duration)
        children.append(
            (
                RechargeAction(start - state.timestamp, duration, start),
                State(state.node_id, start + duration, FULL_BATTERY, state.accumulated_distance),
            )
        )
    if wind_blocked:
        nxt = wind.next_change_after(state.timestamp)
        if nxt is not None:
            children.append(
                (
                    WindWaitAction(nxt),
                    State(state.node_id, nxt, state.battery, state.accumulated_distance),
                )
            )
    if not children:
        raise DeadEndError(f"no action available at node {state.node_id} (t={state.timestamp:.3f})")
    return children


def score_state(
    state: State, network: SkywayNetwork, destination: int | str, air_speed_kmh: float
) -> float:
    """Committed time so far plus an optimistic straight-line remainder.

    The remainder ignores wind and waiting, so it never overestimates;
    lower scores are better.
    """
    remaining = network.straight_line_km(state.node_id, destination)
    return state.timestamp + remaining / air_speed_kmh


@dataclass(frozen=True)
class _Hop:
    """One simulated segment crossing, with the services taken before departure."""

    wait: float
    recharge_duration: float
    recharge_start: float | None
    depart: float
    arrive: float
    battery_after: float


def _hop(
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    weight: float,
    i: int | str,
    j: int | str,
    t: float,
    battery: float,
    *,
    recharge_first: bool,
    energy: EnergyParams,
) -> _Hop | None:
    """Cross segment i-j starting at ``t``, optionally recharging at i first.

    Waits through wind epochs while the leg is wind-blocked.  Returns None
    when the hop cannot be made (battery short, or wind never clears).
    """
    seg = network.segment(i, j)
    bearing = seg.bearing_from(i)
    wait = 0.0
    recharge_duration = 0.0
    recharge_start = None
    now = t
    b = battery
    if recharge_first and b < FULL_BATTERY - _EPS:
        recharge_duration = _recharge_duration(b, drone)
        recharge_start = next_pad_available(network.calendar(i), now, recharge_duration)
        wait += recharge_start - now
        now = recharge_start + recharge_duration
        b = FULL_BATTERY
    while True:
        METER.units += 1
        try:
            kin = ground_speed(drone.speed, wind.at(now), bearing)
        except WindInfeasibleError:
            nxt = wind.next_change_after(now)
            if nxt is None:
                return None
            wait += nxt - now
            now = nxt
            continue
        need = energy.consumed(seg.distance, weight, kin)
        if need > b + _EPS:
            return None
        return _Hop(
            wait=wait,
            recharge_duration=recharge_duration,
            recharge_start=recharge_start,
            depart=now,
            arrive=now + travel_time(seg.distance, kin),
            battery_after=max(b - need, 0.0),
        )


@dataclass(frozen=True)
class PreLegServices:
    """Wait/recharge performed at the route's start node before the first leg."""

    wait: float = 0.0
    recharge_duration: float = 0.0
    recharge_start: float | None = None


class _PlanBuilder:
    """Accumulates committed actions into plan legs.

    Waits and recharges attach to the destination node of the previous leg;
    services taken before the first leg end up in the pre-leg bucket.
    """

    def __init__(self, network: SkywayNetwork, reserve: bool):
        self.network = network
        self.reserve = reserve
        self.legs: list[PlanLeg] = []
        self.pre = PreLegServices()
        self._wait = 0.0
        self._recharge = 0.0
        self._recharge_start: float | None = None

    def wait(self, duration: float) -> None:
        self._wait += duration

    def recharge(self, node_id: int | str, wait: float, duration: float, start: float) -> None:
        self._wait += wait
        self._recharge += duration
        self._recharge_start = start
        if self.reserve and duration > 0:
            reserve_pad(self.network.calendar(node_id), start, duration)

    def travel(
        self,
        from_node: int | str,
        to_node: int | str,
        depart: float,
        arrive: float,
        battery_after: float,
    ) -> None:
        if self.legs:
            self.legs[-1] = replace(
                self.legs[-1],
                wait_duration=self._wait,
                recharge_duration=self._recharge,
                recharge_start=self._recharge_start,
            )
        else:
            self.pre = PreLegServices(self._wait, self._recharge, self._recharge_start)
        self._wait = 0.0
        self._recharge = 0.0
        self._recharge_start = None
        self.legs.append(
            PlanLeg(
                from_node=from_node,
                to_node=to_node,
                depart_time=depart,
                arrive_time=arrive,
                battery_on_arrival=battery_after,
            )
        )

    def apply_hop(self, i: int | str, j: int | str, hop: _Hop) -> None:
        if hop.recharge_duration > 0:
            self.recharge(i, 0.0, hop.recharge_duration, hop.recharge_start)
        self.wait(hop.wait)
        self.travel(i, j, hop.depart, hop.arrive, hop.battery_after)

    def build(self, drone_id: str) -> CompositionPlan:
        return CompositionPlan.from_legs(drone_id, self.legs, self.network)


def simulate_route(
    route: list,
    start_time: float,
    start_battery: float,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    weight: float,
    *,
    recharge_positions: frozenset[int] = frozenset(),
    reserve: bool = False,
    energy: EnergyParams = DEFAULT_ENERGY,
) -> tuple[PreLegServices, list[PlanLeg]]:
    """Fly a fixed node sequence, recharging at hinted positions or when forced.

    Position ``k`` refers to ``route[k]``; a hint there means a recharge
    before departing that node.  Raises RouteInfeasibleError when a hop can
    never be made.
    """
    if len(route) < 2:
        raise ValueError("route needs at least two nodes")
    builder = _PlanBuilder(network, reserve)
    t, b = start_time, start_battery
    for k in range(len(route) - 1):
        i, j = route[k], route[k + 1]
        want = k in recharge_positions and b < FULL_BATTERY - _EPS
        hop = _hop(network, drone, wind, weight, i, j, t, b, recharge_first=want, energy=energy)
        if hop is None and not want and b < FULL_BATTERY - _EPS:
            hop = _hop(network, drone, wind, weight, i, j, t, b, recharge_first=True, energy=energy)
        if hop is None:
            raise RouteInfeasibleError(f"segment {i}-{j} cannot be flown from t={t:.3f}")
        builder.apply_hop(i, j, hop)
        t, b = hop.arrive, hop.battery_after
    return builder.pre, builder.legs


def _optimistic_need(
    distance: float, weight: float, drone: DroneSpec, max_wind: float, energy: EnergyParams
) -> float:
    """Lower bound on the battery spent over a segment under any timeline wind."""
    weight_factor = (energy.frame_mass_kg + weight) / (energy.frame_mass_kg + 1.0)
    best_wind_factor = drone.speed / (drone.speed + max_wind)
    return energy.base_rate_pct_per_10km * (distance / 10.0) * weight_factor * best_wind_factor


def _reachable(
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    weight: float,
    source: int | str,
    destination: int | str,
    energy: EnergyParams,
) -> bool:
    """Connectivity over segments that could ever fit in a full charge."""
    max_wind = max(sample.speed for _, sample in wind.epochs)
    seen = {source}
    stack = [source]
    while stack:
        nid = stack.pop()
        if nid == destination:
            return True
        for j in network.neighbors(nid):
            if j in seen:
                continue
            seg = network.segment(nid, j)
            if _optimistic_need(seg.distance, weight, drone, max_wind, energy) <= FULL_BATTERY + _EPS:
                seen.add(j)
                stack.append(j)
    return destination in seen


def _remaining_km(
    network: SkywayNetwork,
    destination: int | str,
    drone: DroneSpec,
    weight: float,
    wind: WindField,
    energy: EnergyParams,
) -> dict:
    """Shortest flyable-skyway distance from every node to the destination.

    Used as the remainder inside lookahead branch evaluation: the straight
    line underestimates through gaps in the network and can trap the commit
    loop inside a geometric cul-de-sac, whereas the graph metric always
    rewards real progress.  Segments that cannot fit in a full charge under
    any timeline wind are excluded.
    """
    max_wind = max(sample.speed for _, sample in wind.epochs)
    dist = {destination: 0.0}
    heap = [(0.0, _node_order(destination), destination)]
    while heap:
        d, _, nid = heapq.heappop(heap)
        if d > dist[nid] + 1e-12:
            continue
        for j in network.neighbors(nid):
            seg = network.segment(nid, j)
            if _optimistic_need(seg.distance, weight, drone, max_wind, energy) > FULL_BATTERY + _EPS:
                continue
            candidate = d + seg.distance
            if candidate < dist.get(j, math.inf) - 1e-12:
                dist[j] = candidate
                heapq.heappush(heap, (candidate, _node_order(j), j))
    return dist


def _check_payload(drone: DroneSpec, request: DeliveryRequest) -> None:
    if drone.payload_capacity < request.package_weight:
        raise ValueError(
            f"drone {drone.id} (payload {drone.payload_capacity} kg) cannot carry "
            f"{request.package_weight} kg"
        )


def _node_order(nid) -> str:
    return repr(nid)


def compose_lookahead(
    request: DeliveryRequest,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    depth: int = 1,
    *,
    initial_battery: float = FULL_BATTERY,
    energy: EnergyParams = DEFAULT_ENERGY,
    reserve: bool = True,
    commit_limit: int | None = None,
) -> CompositionPlan:
    """Compose a plan by committing the first action of the best-scoring branch.

    ``depth`` is the number of tree levels inspected beyond the immediate
    children; 0 reduces to the greedy baseline by definition.  Committed
    recharges reserve their pad interval unless ``reserve`` is False.
    """
    plan, _ = _compose_lookahead_full(
        request,
        network,
        drone,
        wind,
        depth,
        initial_battery=initial_battery,
        energy=energy,
        reserve=reserve,
        commit_limit=commit_limit,
    )
    return plan


def _compose_lookahead_full(
    request: DeliveryRequest,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    depth: int = 1,
    *,
    initial_battery: float = FULL_BATTERY,
    energy: EnergyParams = DEFAULT_ENERGY,
    reserve: bool = True,
    commit_limit: int | None = None,
) -> tuple[CompositionPlan, PreLegServices]:
    """Lookahead composition that also reports services taken at the source."""
    if depth < 0:
        raise ValueError(f"lookahead depth must be >= 0, got {depth}")
    if depth == 0:
        return _compose_greedy_full(
            request,
            network,
            drone,
            wind,
            initial_battery=initial_battery,
            energy=energy,
            reserve=reserve,
        )
    _check_payload(drone, request)
    if not _reachable(network, drone, wind, request.package_weight, request.source, request.destination, energy):
        raise UnreachableDestinationError(
            f"{request.destination} cannot be reached from {request.source} on any charge"
        )
    destination = request.destination
    weight = request.package_weight
    limit = commit_limit if commit_limit is not None else 10 * len(network.nodes) + 50
    remaining = _remaining_km(network, destination, drone, weight, wind, energy)

    def leaf_value(state: State) -> float:
        rem = remaining.get(state.node_id)
        if rem is None:
            return math.inf
        return state.timestamp + rem / drone.speed

    def branch_value(state: State, levels: int, came_from) -> float:
        # Immediate reversals are pruned inside the evaluation tree: the
        # optimistic remainder ignores battery, so a step straight back would
        # otherwise look deceptively cheap.  A recharge resets the exclusion
        # (returning after a pit stop is a real maneuver).
        if state.node_id == destination or levels == 0:
            return leaf_value(state)
        try:
            children = expand(state, network, drone, wind, weight, energy=energy)
        except DeadEndError:
            return math.inf
        values = []
        for action, child in children:
            if isinstance(action, TravelAction):
                if action.to_node == came_from:
                    continue
                values.append(branch_value(child, levels - 1, state.node_id))
            elif isinstance(action, RechargeAction):
                values.append(branch_value(child, levels - 1, None))
            else:
                values.append(branch_value(child, levels - 1, came_from))
        if not values:
            return math.inf
        return min(values)

    builder = _PlanBuilder(network, reserve)
    cur = State(request.source, request.start_time, initial_battery)
    commits = 0
    tabu = None  # node just departed from; barred unless it is the only move
    while cur.node_id != destination:
        commits += 1
        if commits > limit:
            raise UnreachableDestinationError(
                f"no plan found within {limit} committed actions (possible livelock)"
            )
        try:
            children = expand(cur, network, drone, wind, weight, energy=energy)
        except DeadEndError as exc:
            raise UnreachableDestinationError(str(exc)) from exc
        # An immediate reversal with no service in between is dominated
        # (waiting for a pad is already expressible through the recharge
        # child), and the truncated horizon can make it look deceptively
        # cheap, so bar it whenever an alternative exists.
        candidates = [
            (action, child)
            for action, child in children
            if not (isinstance(action, TravelAction) and action.to_node == tabu)
        ]
        if not candidates:
            candidates = children
        best_key = None
        best: tuple[Action, State] | None = None
        for action, child in candidates:
            origin = cur.node_id if isinstance(action, TravelAction) else None
            value = branch_value(child, depth, origin)
            key = (
                value,
                child.timestamp,
                child.accumulated_distance,
                _node_order(child.node_id),
                _ACTION_RANK[type(action)],
            )
            if best_key is None or key < best_key:
                best_key = key
                best = (action, child)
        assert best is not None
        action, child = best
        if isinstance(action, TravelAction):
            builder.travel(cur.node_id, action.to_node, action.depart_time, action.arrive_time, action.battery_after)
            tabu = cur.node_id
        elif isinstance(action, RechargeAction):
            builder.recharge(cur.node_id, action.wait_duration, action.recharge_duration, action.recharge_start)
            tabu = None
        else:
            builder.wait(action.until - cur.timestamp)
            tabu = None
        cur = child
    return builder.build(drone.id), builder.pre


def compose_greedy(
    request: DeliveryRequest,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    *,
    initial_battery: float = FULL_BATTERY,
    energy: EnergyParams = DEFAULT_ENERGY,
    reserve: bool = True,
    revisit_limit: int = 3,
) -> CompositionPlan:
    """Distance-greedy baseline: shortest segment that makes progress.

    Neighbors that reduce the straight-line distance to the destination are
    preferred; among them the shortest segment wins.  Recharges happen only
    when the chosen leg does not fit in the remaining battery.  Raises
    LivelockError once any node is revisited beyond ``revisit_limit``.
    """
    plan, _ = _compose_greedy_full(
        request,
        network,
        drone,
        wind,
        initial_battery=initial_battery,
        energy=energy,
        reserve=reserve,
        revisit_limit=revisit_limit,
    )
    return plan


def _compose_greedy_full(
    request: DeliveryRequest,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    *,
    initial_battery: float = FULL_BATTERY,
    energy: EnergyParams = DEFAULT_ENERGY,
    reserve: bool = True,
    revisit_limit: int = 3,
) -> tuple[CompositionPlan, PreLegServices]:
    _check_payload(drone, request)
    if not _reachable(network, drone, wind, request.package_weight, request.source, request.destination, energy):
        raise UnreachableDestinationError(
            f"{request.destination} cannot be reached from {request.source} on any charge"
        )
    weight = request.package_weight
    destination = request.destination
    builder = _PlanBuilder(network, reserve)
    cur = request.source
    t = request.start_time
    b = initial_battery
    visits: Counter = Counter({cur: 1})
    while cur != destination:
        sample = wind.at(t)
        flyable = []
        wind_blocked = False
        for j in network.neighbors(cur):
            seg = network.segment(cur, j)
            try:
                kin = ground_speed(drone.speed, sample, seg.bearing_from(cur))
            except WindInfeasibleError:
                wind_blocked = True
                continue
            need = energy.consumed(seg.distance, weight, kin)
            if need > FULL_BATTERY + _EPS:
                continue
            arrive = t + travel_time(seg.distance, kin)
            flyable.append((j, seg, need, arrive))
        if not flyable:
            nxt = wind.next_change_after(t) if wind_blocked else None
            if nxt is None:
                raise UnreachableDestinationError(f"stuck at node {cur} (t={t:.3f})")
            builder.wait(nxt - t)
            t = nxt
            continue
        here = network.straight_line_km(cur, destination)
        reducers = [
            f for f in flyable if network.straight_line_km(f[0], destination) < here - 1e-12
        ]
        pool = reducers if reducers else flyable
        j, seg, need, arrive = min(pool, key=lambda f: (f[1].distance, _node_order(f[0])))
        if need > b + _EPS:
            duration = _recharge_duration(b, drone)
            start = next_pad_available(network.calendar(cur), t, duration)
            builder.recharge(cur, start - t, duration, start)
            t = start + duration
            b = FULL_BATTERY
            continue
        builder.travel(cur, j, t, arrive, max(b - need, 0.0))
        t = arrive
        b = max(b - need, 0.0)
        cur = j
        visits[cur] += 1
        if visits[cur] > revisit_limit:
            raise LivelockError(
                f"node {cur} revisited more than {revisit_limit} times; greedy is looping"
            )
    return builder.build(drone.id), builder.pre


def compose_bruteforce(
    request: DeliveryRequest,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    *,
    node_limit: int = 12,
    initial_battery: float = FULL_BATTERY,
    energy: EnergyParams = DEFAULT_ENERGY,
    reserve: bool = True,
    prune: bool = False,
) -> CompositionPlan:
    """All-paths search: simulate every simple path and recharge pattern.

    Ties on delivery time break by smaller total distance, then the
    lexicographically smallest node sequence.  The default is the literal
    exhaustive enumeration; ``prune=True`` cuts partial paths already slower
    than the best complete plan, which never changes the winner (every
    remaining leg takes positive time) but makes the search incomparable to
    a true all-paths baseline in cost.
    """
    plan, _ = _compose_bruteforce_full(
        request,
        network,
        drone,
        wind,
        node_limit=node_limit,
        initial_battery=initial_battery,
        energy=energy,
        reserve=reserve,
        prune=prune,
    )
    return plan


def _compose_bruteforce_full(
    request: DeliveryRequest,
    network: SkywayNetwork,
    drone: DroneSpec,
    wind: WindField,
    *,
    node_limit: int = 12,
    initial_battery: float = FULL_BATTERY,
    energy: EnergyParams = DEFAULT_ENERGY,
    reserve: bool = True,
    objective: str = "delivery",
    prune: bool = False,
) -> tuple[CompositionPlan, PreLegServices]:
    # "delivery" minimizes last arrival minus first departure (the plan
    # metric); "completion" minimizes absolute arrival, which is what a
    # mid-delivery re-plan cares about (time already spent is sunk).
    if objective not in ("delivery", "completion"):
        raise ValueError(f"unknown objective {objective!r}")
    if len(network.nodes) > node_limit:
        raise InstanceTooLargeError(
            f"{len(network.nodes)} nodes exceeds the all-paths limit of {node_limit}"
        )
    _check_payload(drone, request)
    weight = request.package_weight
    source, destination = request.source, request.destination
    rank = {nid: idx for idx, nid in enumerate(network.node_ids())}
    if prune:
        # Visit promising children first so the incumbent bound tightens
        # early, and skip children that provably cannot reach the
        # destination; neither affects which plan wins.
        remaining = _remaining_km(network, destination, drone, weight, wind, energy)
        children_of = {
            nid: sorted(
                (j for j in network.neighbors(nid) if j in remaining),
                key=lambda j, i=nid: (remaining[j] + network.segment(i, j).distance, rank[j]),
            )
            for nid in network.nodes
        }
    else:
        children_of = {nid: network.neighbors(nid) for nid in network.nodes}

    best_key: tuple | None = None
    best_steps: list[tuple[int | str, int | str, _Hop]] | None = None

    def cost_so_far(t: float, first_depart: float | None) -> float | None:
        if objective == "completion":
            return t
        if first_depart is None:
            return None
        return t - first_depart

    def explore(
        i,
        t: float,
        b: float,
        visited: set,
        seq: tuple,
        steps: list,
        first_depart: float | None,
        distance: float,
        recharges: tuple,
    ) -> None:
        nonlocal best_key, best_steps
        cost = cost_so_far(t, first_depart)
        if i == destination:
            key = (cost, distance, seq, recharges)
            if best_key is None or key < best_key:
                best_key = key
                best_steps = list(steps)
            return
        if prune and best_key is not None and cost is not None and cost >= best_key[0]:
            return
        for j in children_of[i]:
            if j in visited:
                continue
            options = (False, True) if b < FULL_BATTERY - _EPS else (False,)
            for recharge_first in options:
                hop = _hop(
                    network, drone, wind, weight, i, j, t, b,
                    recharge_first=recharge_first, energy=energy,
                )
                if hop is None:
                    continue
                steps.append((i, j, hop))
                visited.add(j)
                explore(
                    j,
                    hop.arrive,
                    hop.battery_after,
                    visited,
                    seq + (rank[j],),
                    steps,
                    first_depart if first_depart is not None else hop.depart,
                    distance + network.segment(i, j).distance,
                    recharges + ((1,) if recharge_first else (0,)),
                )
                visited.discard(j)
                steps.pop()

    explore(source, request.start_time, initial_battery, {source}, (rank[source],), [], None, 0.0, ())
    if best_steps is None:
        raise UnreachableDestinationError(
            f"no feasible path from {source} to {destination}"
        )
    builder = _PlanBuilder(network, reserve)
    for i, j, hop in best_steps:
        builder.apply_hop(i, j, hop)
    return builder.build(drone.id), builder.pre
