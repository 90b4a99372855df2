"""Shared fixtures: small hand-built networks with known optimal plans."""

import pytest

from skyway.model import DeliveryRequest, DroneSpec, PadCalendar, SkywayNetwork
from skyway.wind import CALM, WindField


@pytest.fixture
def drone60():
    """60 km/h drone, 40 km full-charge range, 1 h full recharge."""
    return DroneSpec("d60", "testbed", 2.0, 40.0, 40.0, 60.0, 1.0)


@pytest.fixture
def calm_field():
    return WindField.constant(CALM)


@pytest.fixture
def two_node_net():
    return SkywayNetwork.build({0: (0.0, 0.0), 1: (12.0, 0.0)}, [(0, 1)], pad_count=1)


@pytest.fixture
def detour_net():
    """Short route through a congested station vs a longer free one.

    S(0,0) - A(20,0) - D(40.8,0) is the short corridor, but A's only pad is
    busy [0.2, 0.75) and the A->D hop does not fit in the battery that
    remains after S->A, so the drone must queue there.  S - B(20,15) - D is
    longer yet recharges immediately.
    """
    positions = {"S": (0.0, 0.0), "A": (20.0, 0.0), "B": (20.0, 15.0), "D": (40.8, 0.0)}
    edges = [("S", "A"), ("A", "D"), ("S", "B"), ("B", "D")]
    calendars = {"A": PadCalendar.from_intervals([[(0.2, 0.75)]])}
    return SkywayNetwork.build(positions, edges, pad_count=1, calendars=calendars)


@pytest.fixture
def detour_request():
    return DeliveryRequest(source="S", destination="D", package_weight=1.0)


@pytest.fixture
def spur_net():
    """Greedy trap: the cheapest progress move leads into a dead-end spur."""
    positions = {"P": (0.0, 0.0), "Q": (8.0, 0.0), "R": (8.0, 6.0), "D": (16.0, 0.0)}
    edges = [("P", "Q"), ("P", "R"), ("R", "D")]
    return SkywayNetwork.build(positions, edges, pad_count=1)
