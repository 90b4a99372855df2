"""Candidate drone filtering and skyline selection over QoS attributes.

A drone service is kept in the skyline iff no other service is at least as
good on every compared attribute and strictly better on one.  The skyline is
computed with a block-nested-loop scan whose window holds all incomparable
services seen so far (inputs are small enough that the window is unbounded).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import EmptyCandidateSetError
from .model import DroneSpec


class Direction(Enum):
    LOWER_IS_BETTER = "lower"
    HIGHER_IS_BETTER = "higher"


#: Attributes compared by the skyline, in fixed order.
SKYLINE_ATTRIBUTES = ("flight_time", "flight_range", "recharge_time")


@dataclass(frozen=True)
class QualityDirection:
    """Per-attribute preference direction for skyline comparison."""

    flight_time: Direction = Direction.LOWER_IS_BETTER
    flight_range: Direction = Direction.HIGHER_IS_BETTER
    recharge_time: Direction = Direction.LOWER_IS_BETTER

    def direction(self, attribute: str) -> Direction:
        if attribute not in SKYLINE_ATTRIBUTES:
            raise KeyError(f"unknown skyline attribute {attribute!r}")
        return getattr(self, attribute)


DEFAULT_DIRECTIONS = QualityDirection()


def _attribute_value(drone: DroneSpec, attribute: str) -> float:
    if attribute == "recharge_time":
        return drone.recharge_time_full
    return getattr(drone, attribute)


@dataclass(frozen=True)
class SkylineResult:
    """Skyline membership plus one witness dominator per excluded service."""

    skyline: frozenset[str]
    dominated: dict[str, str]

    def is_skyline(self, drone_id: str) -> bool:
        return drone_id in self.skyline


def payload_filter(candidates: list[DroneSpec], package_weight: float) -> list[DroneSpec]:
    """Keep drones whose payload capacity covers the package weight.

    Equality is admitted.  Raises EmptyCandidateSetError when nothing
    qualifies, signalling an unservable request.
    """
    if package_weight <= 0:
        raise ValueError(f"package weight must be > 0, got {package_weight}")
    kept = [d for d in candidates if d.payload_capacity >= package_weight]
    if not kept:
        raise EmptyCandidateSetError(
            f"no drone can carry {package_weight} kg (checked {len(candidates)})"
        )
    return kept


def dominates(a: DroneSpec, b: DroneSpec, directions: QualityDirection = DEFAULT_DIRECTIONS) -> bool:
    """True iff ``a`` is better-or-equal on all attributes and strictly better on one."""
    strict = False
    for attribute in SKYLINE_ATTRIBUTES:
        va = _attribute_value(a, attribute)
        vb = _attribute_value(b, attribute)
        if directions.direction(attribute) is Direction.HIGHER_IS_BETTER:
            va, vb = -va, -vb
        if va > vb:
            return False
        if va < vb:
            strict = True
    return strict


def bnl_skyline(
    candidates: list[DroneSpec], directions: QualityDirection = DEFAULT_DIRECTIONS
) -> SkylineResult:
    """Block-nested-loop skyline over the candidate set.

    Membership is independent of input order; candidates are scanned in id
    order against a window of incomparable services.
    """
    if not candidates:
        raise ValueError("candidate set must be non-empty")
    dominated: dict[str, str] = {}
    window: list[DroneSpec] = []
    for candidate in sorted(candidates, key=lambda d: d.id):
        dominator = next((w for w in window if dominates(w, candidate, directions)), None)
        if dominator is not None:
            dominated[candidate.id] = dominator.id
            continue
        evicted = [w for w in window if dominates(candidate, w, directions)]
        for loser in evicted:
            dominated[loser.id] = candidate.id
        window = [w for w in window if w not in evicted]
        window.append(candidate)
    return SkylineResult(
        skyline=frozenset(d.id for d in window),
        dominated=dominated,
    )


def select_drone(
    catalog: list[DroneSpec],
    package_weight: float,
    directions: QualityDirection = DEFAULT_DIRECTIONS,
) -> tuple[DroneSpec, SkylineResult]:
    """Filter by payload, compute the skyline, and pick the delivery drone.

    Among skyline members the fastest drone wins (speed drives delivery
    time); ties fall back to longer range, quicker recharge, then id.
    """
    eligible = payload_filter(catalog, package_weight)
    result = bnl_skyline(eligible, directions)
    members = [d for d in eligible if d.id in result.skyline]
    members.sort(key=lambda d: (-d.speed, -d.flight_range, d.recharge_time_full, d.id))
    return members[0], result
