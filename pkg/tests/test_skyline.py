"""Payload filtering, domination, and BNL skyline computation."""

import itertools
import random

import pytest
from hypothesis import given, strategies as st

from skyway.errors import EmptyCandidateSetError
from skyway.model import DroneSpec
from skyway.skyline import (
    DEFAULT_DIRECTIONS,
    Direction,
    QualityDirection,
    bnl_skyline,
    dominates,
    payload_filter,
    select_drone,
)


def service(sid, flight_time_min, flight_range_km, recharge_h):
    """A QoS row as a DroneSpec; speed derived so the range is consistent."""
    speed = flight_range_km / (flight_time_min / 60.0)
    return DroneSpec(
        id=sid,
        name=sid,
        payload_capacity=1.45,
        flight_time=flight_time_min,
        flight_range=flight_range_km,
        speed=speed,
        recharge_time_full=recharge_h,
    )


# Twelve functionally similar services used as the skyline ground truth.
CATALOG_ROWS = {
    "DaaS_01": (20, 0.8, 1.5),
    "DaaS_02": (20, 56, 2),
    "DaaS_03": (25, 8, 1),
    "DaaS_04": (30, 7, 1.5),
    "DaaS_05": (20, 1.6, 1.5),
    "DaaS_06": (18, 0.8, 1.5),
    "DaaS_07": (120, 100, 2),
    "DaaS_08": (20, 3, 1),
    "DaaS_09": (27, 7, 1),
    "DaaS_10": (40, 1.9, 1.5),
    "DaaS_11": (22, 5, 1.5),
    "DaaS_12": (24, 8, 1.5),
}

EXPECTED_SKYLINE = {
    "DaaS_02", "DaaS_03", "DaaS_06", "DaaS_07", "DaaS_08", "DaaS_11", "DaaS_12",
}


def catalog():
    return [service(sid, *row) for sid, row in CATALOG_ROWS.items()]


def oracle_skyline(services, directions=DEFAULT_DIRECTIONS):
    """O(n^2) pairwise-domination reference."""
    return {
        s.id
        for s in services
        if not any(dominates(t, s, directions) for t in services if t.id != s.id)
    }


class TestPayloadFilter:
    def test_heavy_package_excludes(self):
        # every catalog drone has 1.45 kg capacity, so 2 kg is unservable
        with pytest.raises(EmptyCandidateSetError):
            payload_filter(catalog(), 2.0)

    def test_boundary_weight_kept(self):
        kept = payload_filter(catalog(), 1.45)
        assert len(kept) == len(CATALOG_ROWS)

    def test_partial_filter(self):
        drones = catalog() + [
            DroneSpec("heavy", "heavy", 5.0, 40.0, 30.0, 60.0, 1.5)
        ]
        kept = payload_filter(drones, 2.0)
        assert [d.id for d in kept] == ["heavy"]


class TestDominates:
    def test_worked_pair(self):
        # (25, 8, 1) beats (27, 7, 1): better time, better range, equal recharge
        assert dominates(service("a", 25, 8, 1), service("b", 27, 7, 1))

    def test_irreflexive(self):
        a = service("a", 25, 8, 1)
        assert not dominates(a, a)

    def test_incomparable_pair(self):
        a = service("a", 20, 56, 2)
        b = service("b", 120, 100, 2)
        assert not dominates(a, b)
        assert not dominates(b, a)

    @given(st.data())
    def test_antisymmetry_and_transitivity(self, data):
        def svc(tag):
            return service(
                tag,
                data.draw(st.sampled_from([18, 20, 25, 30])),
                data.draw(st.sampled_from([1.0, 5.0, 8.0, 56.0])),
                data.draw(st.sampled_from([1.0, 1.5, 2.0])),
            )

        a, b, c = svc("a"), svc("b"), svc("c")
        if dominates(a, b):
            assert not dominates(b, a)
        if dominates(a, b) and dominates(b, c):
            assert dominates(a, c)


class TestBnlSkyline:
    def test_ground_truth_catalog(self):
        result = bnl_skyline(catalog())
        assert result.skyline == EXPECTED_SKYLINE
        assert set(result.dominated) == set(CATALOG_ROWS) - EXPECTED_SKYLINE
        for loser, witness in result.dominated.items():
            assert dominates(
                service(witness, *CATALOG_ROWS[witness]),
                service(loser, *CATALOG_ROWS[loser]),
            )

    def test_single_candidate(self):
        only = service("solo", 20, 3, 1)
        result = bnl_skyline([only])
        assert result.skyline == {"solo"}
        assert result.dominated == {}

    def test_matches_bruteforce_oracle_on_random_sets(self):
        rng = random.Random(7)
        for _ in range(50):
            services = [
                service(
                    f"s{i}",
                    rng.choice([15, 20, 25, 30, 40]),
                    rng.choice([1.0, 3.0, 5.0, 8.0, 20.0]),
                    rng.choice([1.0, 1.5, 2.0]),
                )
                for i in range(8)
            ]
            assert bnl_skyline(services).skyline == oracle_skyline(services)

    def test_permutation_invariance(self):
        services = catalog()
        baseline = bnl_skyline(services).skyline
        rng = random.Random(3)
        for _ in range(10):
            rng.shuffle(services)
            assert bnl_skyline(services).skyline == baseline

    def test_idempotent(self):
        services = catalog()
        first = bnl_skyline(services)
        members = [s for s in services if s.id in first.skyline]
        assert bnl_skyline(members).skyline == first.skyline

    def test_full_tie_keeps_both(self):
        a = service("a", 20, 3, 1)
        b = service("b", 20, 3, 1)
        result = bnl_skyline([a, b])
        assert result.skyline == {"a", "b"}

    def test_configurable_directions(self):
        flipped = QualityDirection(flight_time=Direction.HIGHER_IS_BETTER)
        result = bnl_skyline(catalog(), flipped)
        # with flight time preferred high, the 120-minute service beats more rows
        assert "DaaS_07" in result.skyline
        assert result.skyline != EXPECTED_SKYLINE


class TestSelectDrone:
    def test_picks_fastest_skyline_member(self):
        chosen, result = select_drone(catalog(), 1.0)
        members = [sid for sid in result.skyline]
        assert chosen.id in members
        speeds = {sid: service(sid, *CATALOG_ROWS[sid]).speed for sid in members}
        assert chosen.speed == max(speeds.values())
