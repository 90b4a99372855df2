"""Independent reference implementations used to cross-check the planners.

The route enumeration and stepping here are written from scratch against the
wind/pad primitives so the all-paths planner can be verified against a
second, structurally different search.
"""

from skyway.errors import WindInfeasibleError
from skyway.model import next_pad_available
from skyway.wind import battery_consumed, ground_speed, travel_time

FULL = 100.0
_EPS = 1e-9


def hop_oracle(
    network, drone, wind, weight, i, j, t, battery, recharge_first,
    base_rate=25.0, frame_mass=3.0,
):
    """Cross segment i-j; returns (depart, arrive, battery_after) or None."""
    now, b = t, battery
    if recharge_first and b < FULL - _EPS:
        duration = (FULL - b) / FULL * drone.recharge_time_full
        start = next_pad_available(network.calendar(i), now, duration)
        now, b = start + duration, FULL
    seg = network.segment(i, j)
    bearing = seg.bearing_from(i)
    while True:
        try:
            kin = ground_speed(drone.speed, wind.at(now), bearing)
        except WindInfeasibleError:
            nxt = wind.next_change_after(now)
            if nxt is None:
                return None
            now = nxt
            continue
        need = battery_consumed(
            seg.distance, weight, kin,
            base_rate_pct_per_10km=base_rate, frame_mass_kg=frame_mass,
        )
        if need > b + _EPS:
            return None
        return now, now + travel_time(seg.distance, kin), b - need


def all_completions(network, drone, wind, weight, src, dst, start_time=0.0, battery=FULL):
    """Every (delivery, distance, seq, recharge pattern) over simple paths
    and per-hop recharge decisions, by plain recursion with no pruning."""
    results = []

    def walk(i, t, b, visited, seq, dist, recharges, first_depart):
        if i == dst:
            results.append((t - first_depart, dist, seq, recharges))
            return
        for j in sorted(network.neighbors(i), key=repr):
            if j in visited:
                continue
            options = (False, True) if b < FULL - _EPS else (False,)
            for recharge in options:
                res = hop_oracle(network, drone, wind, weight, i, j, t, b, recharge)
                if res is None:
                    continue
                depart, arrive, after = res
                walk(
                    j,
                    arrive,
                    after,
                    visited | {j},
                    seq + (repr(j),),
                    dist + network.segment(i, j).distance,
                    recharges + (int(recharge),),
                    first_depart if first_depart is not None else depart,
                )

    walk(src, start_time, battery, {src}, (repr(src),), 0.0, (), None)
    return results


def best_completion(network, drone, wind, weight, src, dst, start_time=0.0, battery=FULL):
    """Minimum completion under the (delivery, distance, sequence, recharges) order."""
    results = all_completions(network, drone, wind, weight, src, dst, start_time, battery)
    if not results:
        return None
    return min(results)
