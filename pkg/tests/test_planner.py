"""State expansion, scoring, and the three composers."""

import math

import pytest

from _oracle import best_completion
from skyway.errors import (
    DeadEndError,
    InstanceTooLargeError,
    LivelockError,
    UnreachableDestinationError,
)
from skyway.model import (
    DeliveryRequest,
    DroneSpec,
    PadCalendar,
    SkywayNetwork,
    validate_plan,
)
from skyway.planner import (
    RechargeAction,
    State,
    TravelAction,
    WindWaitAction,
    compose_bruteforce,
    compose_greedy,
    compose_lookahead,
    expand,
    score_state,
    simulate_route,
)
from skyway.wind import CALM, WindField, WindSample


def star_net():
    # center 0 with neighbors at 4, 8, 12 km
    positions = {0: (0.0, 0.0), 1: (4.0, 0.0), 2: (0.0, 8.0), 3: (-12.0, 0.0)}
    edges = [(0, 1), (0, 2), (0, 3), (1, 2)]
    return SkywayNetwork.build(positions, edges, pad_count=1)


class TestExpand:
    def test_full_battery_travel_children_only(self, drone60, calm_field):
        net = star_net()
        children = expand(State(0, 0.0, 100.0), net, drone60, calm_field, 1.0)
        kinds = [type(a) for a, _ in children]
        assert kinds == [TravelAction, TravelAction, TravelAction]

    def test_low_battery_limits_travel(self, drone60, calm_field):
        # 4/8/12 km cost 10/20/30 percent; 15 percent reaches one neighbor
        net = star_net()
        children = expand(State(0, 0.0, 15.0), net, drone60, calm_field, 1.0)
        travels = [a for a, _ in children if isinstance(a, TravelAction)]
        recharges = [a for a, _ in children if isinstance(a, RechargeAction)]
        assert [t.to_node for t in travels] == [1]
        assert len(recharges) == 1

    def test_recharge_child_timing(self, drone60, calm_field):
        net = star_net()
        children = expand(State(0, 0.0, 40.0), net, drone60, calm_field, 1.0)
        recharge = next(a for a, _ in children if isinstance(a, RechargeAction))
        assert recharge.recharge_duration == pytest.approx(0.6)  # 60% deficit of 1 h
        assert recharge.wait_duration == 0.0

    def test_all_segments_wind_blocked(self, drone60):
        # wind from due north at 100 km/h, both neighbors due east/west:
        # pure crosswind above the 60 km/h air speed on every segment
        positions = {0: (0.0, 0.0), 1: (10.0, 0.0), 2: (-10.0, 0.0)}
        net = SkywayNetwork.build(positions, [(0, 1), (0, 2), (1, 2)], pad_count=1)
        field = WindField(((0.0, WindSample(100.0, 0.0)), (1.0, CALM)))
        children = expand(State(0, 0.0, 80.0), net, drone60, field, 1.0)
        kinds = {type(a) for a, _ in children}
        assert kinds == {RechargeAction, WindWaitAction}
        wait = next(a for a, _ in children if isinstance(a, WindWaitAction))
        assert wait.until == 1.0

    def test_dead_end_raises(self, drone60, calm_field):
        # full battery, far neighbor only: nothing to do
        positions = {0: (0.0, 0.0), 1: (100.0, 0.0)}
        net = SkywayNetwork.build(positions, [(0, 1)], pad_count=1)
        with pytest.raises(DeadEndError):
            expand(State(0, 0.0, 100.0), net, drone60, calm_field, 1.0)


class TestScoreState:
    def test_at_destination_score_is_timestamp(self, drone60):
        net = star_net()
        assert score_state(State(2, 3.5, 50.0), net, 2, drone60.speed) == 3.5

    def test_nearer_state_scores_lower(self, drone60):
        net = star_net()
        near = score_state(State(1, 1.0, 50.0), net, 2, drone60.speed)
        far = score_state(State(3, 1.0, 50.0), net, 2, drone60.speed)
        assert near < far


class TestComposeTrivial:
    def test_two_node_single_leg(self, two_node_net, drone60, calm_field):
        request = DeliveryRequest(source=0, destination=1, package_weight=1.0)
        plan = compose_lookahead(request, two_node_net, drone60, calm_field)
        assert len(plan.legs) == 1
        assert plan.total_delivery_time == pytest.approx(12.0 / 60.0)
        assert validate_plan(plan, two_node_net, request) == []

    def test_greedy_matches_on_two_nodes(self, two_node_net, drone60, calm_field):
        request = DeliveryRequest(source=0, destination=1, package_weight=1.0)
        a = compose_lookahead(request, two_node_net, drone60, calm_field, reserve=False)
        b = compose_greedy(request, two_node_net, drone60, calm_field, reserve=False)
        assert a == b

    def test_depth_zero_is_greedy(self, detour_net, drone60, calm_field, detour_request):
        viazero = compose_lookahead(
            detour_request, detour_net, drone60, calm_field, depth=0, reserve=False
        )
        greedy = compose_greedy(detour_request, detour_net, drone60, calm_field, reserve=False)
        assert viazero == greedy


class TestCongestedDetour:
    """The short corridor queues at a busy pad; lookahead takes the detour."""

    def test_greedy_takes_congested_corridor(self, detour_net, drone60, calm_field, detour_request):
        plan = compose_greedy(detour_request, detour_net, drone60, calm_field, reserve=False)
        assert plan.node_sequence() == ["S", "A", "D"]
        assert plan.total_delivery_time == pytest.approx(0.75 + 0.5 + 20.8 / 60.0)

    def test_lookahead_routes_around(self, detour_net, drone60, calm_field, detour_request):
        plan = compose_lookahead(detour_request, detour_net, drone60, calm_field, depth=1)
        assert plan.node_sequence() == ["S", "B", "D"]
        expected = 25.0 / 60.0 + 0.625 + math.dist((20, 15), (40.8, 0)) / 60.0
        assert plan.total_delivery_time == pytest.approx(expected)
        assert validate_plan(plan, detour_net, detour_request) == []
        # the committed recharge is on the calendar at B
        assert detour_net.calendar("B").pads[0]

    def test_lookahead_beats_greedy(self, detour_net, drone60, calm_field, detour_request):
        fast = compose_lookahead(detour_request, detour_net, drone60, calm_field, reserve=False)
        slow = compose_greedy(detour_request, detour_net, drone60, calm_field, reserve=False)
        assert fast.total_delivery_time < slow.total_delivery_time

    def test_bruteforce_agrees_with_oracle(self, detour_net, drone60, calm_field, detour_request):
        plan = compose_bruteforce(detour_request, detour_net, drone60, calm_field, reserve=False)
        oracle = best_completion(detour_net, drone60, calm_field, 1.0, "S", "D")
        assert plan.total_delivery_time == pytest.approx(oracle[0])
        assert tuple(repr(n) for n in plan.node_sequence()) == oracle[2]

    def test_bruteforce_not_worse_than_lookahead(self, detour_net, drone60, calm_field, detour_request):
        optimal = compose_bruteforce(detour_request, detour_net, drone60, calm_field, reserve=False)
        heuristic = compose_lookahead(detour_request, detour_net, drone60, calm_field, reserve=False)
        assert optimal.total_delivery_time <= heuristic.total_delivery_time + 1e-9


class TestSpurTrap:
    def test_greedy_livelocks(self, spur_net, drone60, calm_field):
        request = DeliveryRequest(source="P", destination="D", package_weight=1.0)
        with pytest.raises(LivelockError):
            compose_greedy(request, spur_net, drone60, calm_field, reserve=False)

    def test_lookahead_avoids_spur(self, spur_net, drone60, calm_field):
        request = DeliveryRequest(source="P", destination="D", package_weight=1.0)
        plan = compose_lookahead(request, spur_net, drone60, calm_field, reserve=False)
        assert plan.node_sequence() == ["P", "R", "D"]

    def test_bruteforce_finds_only_route(self, spur_net, drone60, calm_field):
        request = DeliveryRequest(source="P", destination="D", package_weight=1.0)
        plan = compose_bruteforce(request, spur_net, drone60, calm_field, reserve=False)
        assert plan.node_sequence() == ["P", "R", "D"]


class TestDiamondWind:
    def diamond(self):
        positions = {0: (0.0, 0.0), 1: (10.0, 10.0), 2: (10.0, -10.0), 3: (20.0, 0.0)}
        edges = [(0, 1), (1, 3), (0, 2), (2, 3)]
        return SkywayNetwork.build(positions, edges, pad_count=1)

    def test_symmetric_tie_breaks_lexicographically(self, drone60, calm_field):
        request = DeliveryRequest(source=0, destination=3, package_weight=1.0)
        plan = compose_bruteforce(request, self.diamond(), drone60, calm_field, reserve=False)
        assert plan.node_sequence() == [0, 1, 3]

    def test_wind_penalized_route_avoided(self, drone60):
        # wind from the northeast hits both legs of the upper route harder
        field = WindField.constant(WindSample(30.0, 45.0))
        request = DeliveryRequest(source=0, destination=3, package_weight=1.0)
        net = self.diamond()
        plan = compose_bruteforce(request, net, drone60, field, reserve=False)
        oracle = best_completion(net, drone60, field, 1.0, 0, 3)
        assert tuple(repr(n) for n in plan.node_sequence()) == oracle[2]
        assert plan.node_sequence() == [0, 2, 3]
        assert plan.total_delivery_time == pytest.approx(oracle[0])

    def test_single_path_returned_regardless_of_cost(self, drone60):
        # headwind on the only corridor: still the only answer
        positions = {0: (0.0, 0.0), 1: (10.0, 0.0), 2: (20.0, 0.0)}
        net = SkywayNetwork.build(positions, [(0, 1), (1, 2)], pad_count=1)
        field = WindField.constant(WindSample(30.0, 90.0))
        request = DeliveryRequest(source=0, destination=2, package_weight=1.0)
        plan = compose_bruteforce(request, net, drone60, field, reserve=False)
        assert plan.node_sequence() == [0, 1, 2]


class TestGuards:
    def test_unreachable_destination(self, drone60, calm_field):
        positions = {0: (0.0, 0.0), 1: (100.0, 0.0)}
        net = SkywayNetwork.build(positions, [(0, 1)], pad_count=1)
        request = DeliveryRequest(source=0, destination=1, package_weight=1.0)
        for compose in (compose_lookahead, compose_greedy, compose_bruteforce):
            with pytest.raises(UnreachableDestinationError):
                compose(request, net, drone60, calm_field, reserve=False)

    def test_instance_too_large(self, drone60, calm_field):
        positions = {i: (float(i), 0.0) for i in range(13)}
        edges = [(i, i + 1) for i in range(12)]
        net = SkywayNetwork.build(positions, edges, pad_count=1)
        request = DeliveryRequest(source=0, destination=12, package_weight=1.0)
        with pytest.raises(InstanceTooLargeError):
            compose_bruteforce(request, net, drone60, calm_field, reserve=False)

    def test_payload_precondition(self, two_node_net, drone60, calm_field):
        request = DeliveryRequest(source=0, destination=1, package_weight=5.0)
        with pytest.raises(ValueError, match="cannot carry"):
            compose_lookahead(request, two_node_net, drone60, calm_field, reserve=False)


class TestDeterminismAndInvariants:
    def test_identical_inputs_identical_plans(self, drone60):
        def run():
            positions = {"S": (0.0, 0.0), "A": (20.0, 0.0), "B": (20.0, 15.0), "D": (40.8, 0.0)}
            edges = [("S", "A"), ("A", "D"), ("S", "B"), ("B", "D")]
            calendars = {"A": PadCalendar.from_intervals([[(0.2, 0.75)]])}
            net = SkywayNetwork.build(positions, edges, pad_count=1, calendars=calendars)
            request = DeliveryRequest(source="S", destination="D", package_weight=1.0)
            return compose_lookahead(request, net, drone60, WindField.constant(CALM))

        assert run() == run()

    def test_battery_never_negative(self, detour_net, drone60, calm_field, detour_request):
        for compose in (compose_lookahead, compose_greedy, compose_bruteforce):
            plan = compose(detour_request, detour_net, drone60, calm_field, reserve=False)
            assert all(leg.battery_on_arrival >= 0.0 for leg in plan.legs)

    def test_committed_reservations_capacity(self, detour_net, drone60, calm_field, detour_request):
        compose_lookahead(detour_request, detour_net, drone60, calm_field, reserve=True)
        for nid in detour_net.nodes:
            detour_net.calendar(nid).check()


class TestSimulateRoute:
    def test_reproduces_lookahead_times(self, detour_net, drone60, calm_field, detour_request):
        plan = compose_lookahead(detour_request, detour_net, drone60, calm_field, reserve=False)
        recharge_positions = frozenset(
            idx + 1 for idx, leg in enumerate(plan.legs) if leg.recharge_duration > 0
        )
        pre, legs = simulate_route(
            plan.node_sequence(), 0.0, 100.0, detour_net, drone60, calm_field, 1.0,
            recharge_positions=recharge_positions,
        )
        assert [l.arrive_time for l in legs] == pytest.approx([l.arrive_time for l in plan.legs])
        assert pre.recharge_duration == 0.0

    def test_necessity_recharge_inserted(self, detour_net, drone60, calm_field):
        # no hints: the engine must still recharge at B to reach D
        pre, legs = simulate_route(
            ["S", "B", "D"], 0.0, 100.0, detour_net, drone60, calm_field, 1.0
        )
        assert legs[0].recharge_duration > 0
