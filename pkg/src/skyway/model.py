"""Domain types for the skyway delivery network.

Nodes double as recharging stations with a fixed number of pads; occupancy
is tracked per node in a :class:`PadCalendar`.  Everything here is an
immutable value except the calendar, which is mutated only through
:func:`reserve_pad` / :func:`release_pad`.
"""

from __future__ import annotations

import math
from bisect import insort
from dataclasses import dataclass, field

from .errors import ReservationConflictError

_EPS = 1e-9

#: Allowed slack between the quoted flight range and speed * flight time,
#: absorbing rounding in manufacturer data.
RANGE_CONSISTENCY_SLACK = 1.05


@dataclass(frozen=True)
class DroneSpec:
    """A candidate drone's quality-of-service tuple.

    Units: payload_capacity kg, flight_time minutes at full charge,
    flight_range km at full charge, speed km/h (air speed),
    recharge_time_full hours for a 0 to 100% charge.
    """

    id: str
    name: str
    payload_capacity: float
    flight_time: float
    flight_range: float
    speed: float
    recharge_time_full: float

    def __post_init__(self):
        for attr in ("payload_capacity", "flight_time", "flight_range", "speed", "recharge_time_full"):
            if getattr(self, attr) <= 0:
                raise ValueError(f"{attr} must be > 0, got {getattr(self, attr)}")
        implied = self.speed * self.flight_time / 60.0
        if self.flight_range > implied * RANGE_CONSISTENCY_SLACK:
            raise ValueError(
                f"flight_range {self.flight_range} km inconsistent with "
                f"speed * flight_time = {implied:.2f} km"
            )


class PadCalendar:
    """Per-pad occupancy intervals ``[start, end)`` in hours since epoch.

    Intervals within one pad are kept disjoint and sorted by start.
    """

    __slots__ = ("pads",)

    def __init__(self, pad_count: int):
        if pad_count < 1:
            raise ValueError(f"pad_count must be >= 1, got {pad_count}")
        self.pads: list[list[tuple[float, float]]] = [[] for _ in range(pad_count)]

    @classmethod
    def from_intervals(cls, intervals_per_pad: list[list[tuple[float, float]]]) -> "PadCalendar":
        cal = cls(len(intervals_per_pad))
        for idx, intervals in enumerate(intervals_per_pad):
            for start, end in sorted(intervals):
                if end <= start:
                    raise ValueError(f"interval [{start}, {end}) is empty or inverted")
                if cal.pads[idx] and start < cal.pads[idx][-1][1]:
                    raise ValueError(f"overlapping intervals on pad {idx}")
                cal.pads[idx].append((start, end))
        return cal

    @property
    def pad_count(self) -> int:
        return len(self.pads)

    def copy(self) -> "PadCalendar":
        cal = PadCalendar(self.pad_count)
        cal.pads = [list(intervals) for intervals in self.pads]
        return cal

    def is_congested(self, t: float) -> bool:
        """True iff every pad is occupied at instant ``t``."""
        for intervals in self.pads:
            if not any(start <= t < end for start, end in intervals):
                return False
        return True

    def reserve_on_pad(self, pad_index: int, t: float, duration: float) -> float:
        """Book the earliest free slot >= t on one specific pad; returns its start.

        Used to inject background occupancy without violating capacity.
        """
        if duration <= 0:
            raise ValueError(f"duration must be > 0, got {duration}")
        start = _pad_free_from(self.pads[pad_index], t, duration)
        insort(self.pads[pad_index], (start, start + duration))
        return start

    def check(self) -> None:
        """Raise AssertionError if any pad holds overlapping or inverted intervals."""
        for idx, intervals in enumerate(self.pads):
            for (s1, e1), (s2, e2) in zip(intervals, intervals[1:]):
                assert e1 <= s2 + _EPS, f"pad {idx}: [{s1},{e1}) overlaps [{s2},{e2})"
            assert all(e > s for s, e in intervals), f"pad {idx}: inverted interval"


def _pad_free_from(intervals: list[tuple[float, float]], t: float, duration: float) -> float:
    """Earliest t' >= t at which this single pad is free for [t', t'+duration)."""
    candidate = t
    for start, end in intervals:
        if end <= candidate:
            continue
        if candidate + duration <= start + _EPS:
            break
        candidate = max(candidate, end)
    return candidate


def next_pad_available(calendar: PadCalendar, t: float, duration: float) -> float:
    """Earliest t' >= t at which some pad is free for ``[t', t'+duration)``.

    The horizon beyond the last booked interval is treated as free, so this
    always succeeds; the waiting time is ``t' - t``.
    """
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    return min(_pad_free_from(intervals, t, duration) for intervals in calendar.pads)


def reserve_pad(calendar: PadCalendar, t: float, duration: float) -> PadCalendar:
    """Book ``[t, t+duration)`` on the lowest-index free pad, in place.

    Raises ReservationConflictError if no pad is free for the full interval.
    """
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    if duration == 0:
        return calendar
    for intervals in calendar.pads:
        if _pad_free_from(intervals, t, duration) <= t + _EPS:
            insort(intervals, (t, t + duration))
            return calendar
    raise ReservationConflictError(f"no pad free for [{t:.4f}, {t + duration:.4f})")


def release_pad(calendar: PadCalendar, start: float, duration: float) -> None:
    """Remove a previously booked interval (searched across pads by value)."""
    if duration == 0:
        return
    for intervals in calendar.pads:
        for idx, (s, e) in enumerate(intervals):
            if abs(s - start) < _EPS and abs(e - (start + duration)) < _EPS:
                del intervals[idx]
                return
    raise KeyError(f"no reservation [{start:.4f}, {start + duration:.4f}) to release")


@dataclass(frozen=True)
class Node:
    """A skyway node: rooftop position, recharging pads, and their calendar."""

    id: int | str
    position: tuple[float, float]
    pad_count: int
    calendar: PadCalendar = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        if self.pad_count < 1:
            raise ValueError(f"pad_count must be >= 1, got {self.pad_count}")
        if self.calendar is None:
            object.__setattr__(self, "calendar", PadCalendar(self.pad_count))
        elif self.calendar.pad_count != self.pad_count:
            raise ValueError("calendar pad count does not match node pad_count")


def compass_bearing(p: tuple[float, float], q: tuple[float, float]) -> float:
    """Compass bearing in degrees from planar point p toward q (0 = +y)."""
    deg = math.degrees(math.atan2(q[0] - p[0], q[1] - p[1]))
    return deg % 360.0


@dataclass(frozen=True)
class SkywaySegment:
    """An undirected skyway segment with its length and compass bearing."""

    node_a: int | str
    node_b: int | str
    distance: float
    bearing_ab: float

    def __post_init__(self):
        if self.distance <= 0:
            raise ValueError(f"segment distance must be > 0, got {self.distance}")

    def bearing_from(self, origin: int | str) -> float:
        if origin == self.node_a:
            return self.bearing_ab
        if origin == self.node_b:
            return (self.bearing_ab + 180.0) % 360.0
        raise KeyError(f"{origin} is not an endpoint of {self.node_a}-{self.node_b}")

    def other(self, origin: int | str) -> int | str:
        if origin == self.node_a:
            return self.node_b
        if origin == self.node_b:
            return self.node_a
        raise KeyError(f"{origin} is not an endpoint of {self.node_a}-{self.node_b}")


class SkywayNetwork:
    """Undirected, connected graph of nodes and segments with adjacency index."""

    def __init__(self, nodes: list[Node], segments: list[SkywaySegment]):
        self.nodes: dict[int | str, Node] = {n.id: n for n in nodes}
        if len(self.nodes) != len(nodes):
            raise ValueError("duplicate node ids")
        positions = {n.position for n in nodes}
        if len(positions) != len(nodes):
            raise ValueError("node positions must be unique")
        self._segments: list[SkywaySegment] = []
        self._by_pair: dict[tuple, SkywaySegment] = {}
        self._adjacency: dict[int | str, list[int | str]] = {n.id: [] for n in nodes}
        for seg in segments:
            if seg.node_a == seg.node_b:
                raise ValueError(f"self-loop at {seg.node_a}")
            if seg.node_a not in self.nodes or seg.node_b not in self.nodes:
                raise ValueError(f"segment {seg.node_a}-{seg.node_b} references unknown node")
            if (seg.node_a, seg.node_b) in self._by_pair:
                raise ValueError(f"duplicate segment {seg.node_a}-{seg.node_b}")
            self._segments.append(seg)
            self._by_pair[(seg.node_a, seg.node_b)] = seg
            self._by_pair[(seg.node_b, seg.node_a)] = seg
            self._adjacency[seg.node_a].append(seg.node_b)
            self._adjacency[seg.node_b].append(seg.node_a)
        for nid in self._adjacency:
            self._adjacency[nid].sort()
        self._check_connected()

    def _check_connected(self) -> None:
        if not self.nodes:
            raise ValueError("network has no nodes")
        seen = set()
        stack = [next(iter(self.nodes))]
        while stack:
            nid = stack.pop()
            if nid in seen:
                continue
            seen.add(nid)
            stack.extend(self._adjacency[nid])
        if len(seen) != len(self.nodes):
            raise ValueError("network is not connected")

    @classmethod
    def build(
        cls,
        positions: dict[int | str, tuple[float, float]],
        edges: list[tuple[int | str, int | str]],
        pad_count: int = 1,
        calendars: dict[int | str, PadCalendar] | None = None,
    ) -> "SkywayNetwork":
        """Construct from raw positions and edge pairs; distances and bearings derived."""
        calendars = calendars or {}
        nodes = [
            Node(nid, pos, pad_count, calendars.get(nid))
            for nid, pos in positions.items()
        ]
        segments = [
            SkywaySegment(a, b, math.dist(positions[a], positions[b]), compass_bearing(positions[a], positions[b]))
            for a, b in edges
        ]
        return cls(nodes, segments)

    def node_ids(self) -> list[int | str]:
        return sorted(self.nodes, key=repr)

    def neighbors(self, nid: int | str) -> list[int | str]:
        return self._adjacency[nid]

    def segment(self, a: int | str, b: int | str) -> SkywaySegment:
        return self._by_pair[(a, b)]

    def has_segment(self, a: int | str, b: int | str) -> bool:
        return (a, b) in self._by_pair

    def segments(self) -> list[SkywaySegment]:
        return list(self._segments)

    def straight_line_km(self, a: int | str, b: int | str) -> float:
        return math.dist(self.nodes[a].position, self.nodes[b].position)

    def calendar(self, nid: int | str) -> PadCalendar:
        return self.nodes[nid].calendar


@dataclass(frozen=True)
class DeliveryRequest:
    """One package to move from source to destination, starting at start_time."""

    source: int | str
    destination: int | str
    package_weight: float
    start_time: float = 0.0

    def __post_init__(self):
        if self.source == self.destination:
            raise ValueError("source and destination must differ")
        if self.package_weight <= 0:
            raise ValueError(f"package weight must be > 0, got {self.package_weight}")


@dataclass(frozen=True)
class PlanLeg:
    """One flown segment plus the wait/recharge performed at its destination node.

    ``recharge_start`` records when charging begins at the to-node (None when
    no recharge is planned); it pins down the pad reservation interval.
    """

    from_node: int | str
    to_node: int | str
    depart_time: float
    arrive_time: float
    wait_duration: float = 0.0
    recharge_duration: float = 0.0
    battery_on_arrival: float = 100.0
    recharge_start: float | None = None

    def __post_init__(self):
        if self.arrive_time <= self.depart_time:
            raise ValueError("arrive_time must be > depart_time")
        if self.wait_duration < 0 or self.recharge_duration < 0:
            raise ValueError("wait and recharge durations must be >= 0")
        if not -_EPS <= self.battery_on_arrival <= 100.0 + _EPS:
            raise ValueError(f"battery_on_arrival out of [0, 100]: {self.battery_on_arrival}")

    @property
    def ready_time(self) -> float:
        """When the drone can depart the to-node after waiting and recharging."""
        return self.arrive_time + self.wait_duration + self.recharge_duration


@dataclass(frozen=True)
class CompositionPlan:
    """An ordered chain of legs assigned to one drone.

    Totals aggregate the per-leg values: distance is the sum of segment
    lengths, delivery time spans first departure to final arrival.
    """

    drone: str
    legs: tuple[PlanLeg, ...]
    total_delivery_time: float
    total_distance: float

    @classmethod
    def from_legs(cls, drone: str, legs: list[PlanLeg], network: SkywayNetwork) -> "CompositionPlan":
        if not legs:
            raise ValueError("a plan needs at least one leg")
        distance = sum(network.segment(l.from_node, l.to_node).distance for l in legs)
        return cls(
            drone=drone,
            legs=tuple(legs),
            total_delivery_time=legs[-1].arrive_time - legs[0].depart_time,
            total_distance=distance,
        )

    @property
    def source(self) -> int | str:
        return self.legs[0].from_node

    @property
    def destination(self) -> int | str:
        return self.legs[-1].to_node

    def node_sequence(self) -> list[int | str]:
        return [self.legs[0].from_node] + [l.to_node for l in self.legs]


def validate_plan(
    plan: CompositionPlan, network: SkywayNetwork, request: DeliveryRequest
) -> list[str]:
    """Check every plan invariant; returns violation messages, empty when valid."""
    violations: list[str] = []
    legs = plan.legs
    if not legs:
        return ["plan has no legs"]
    if legs[0].from_node != request.source:
        violations.append(f"plan starts at {legs[0].from_node}, request source is {request.source}")
    if legs[-1].to_node != request.destination:
        violations.append(
            f"plan ends at {legs[-1].to_node}, request destination is {request.destination}"
        )
    distance = 0.0
    for idx, leg in enumerate(legs, start=1):
        if not network.has_segment(leg.from_node, leg.to_node):
            violations.append(f"unknown segment {leg.from_node}-{leg.to_node} at leg {idx}")
        else:
            distance += network.segment(leg.from_node, leg.to_node).distance
        if idx > 1:
            prev = legs[idx - 2]
            if leg.from_node != prev.to_node:
                violations.append(f"chain break at leg {idx}")
            elif abs(leg.depart_time - prev.ready_time) > 1e-6:
                violations.append(f"time chain mismatch at leg {idx}")
        if not -_EPS <= leg.battery_on_arrival <= 100.0 + _EPS:
            violations.append(f"battery out of range at leg {idx}")
    if abs(distance - plan.total_distance) > 1e-6:
        violations.append("distance aggregation mismatch")
    span = legs[-1].arrive_time - legs[0].depart_time
    if abs(span - plan.total_delivery_time) > 1e-6:
        violations.append("delivery time aggregation mismatch")
    return violations
