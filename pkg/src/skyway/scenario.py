"""Seeded scenario generation and scenario/catalog file I/O.

Networks are synthetic: nodes uniform over a square area, segments from
3-nearest-neighbor adjacency unioned with a Euclidean minimum spanning tree
for connectivity.  A share of "hot" stations gets rush-hour pad occupancy so
waiting time and congestion actually occur.  Everything is a pure function
of the seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import squareform, pdist

from .errors import ConfigError
from .model import DeliveryRequest, DroneSpec, Node, PadCalendar, SkywayNetwork, SkywaySegment, compass_bearing
from .resilience import PerturbationModel
from .wind import EnergyParams, WindField, WindSample

#: Drone archetypes the catalog is sampled around: (name, payload kg,
#: flight time min, range km, speed km/h, full recharge h).  The first row
#: is a real production quadcopter; the rest are plausible fleet mates.
DRONE_ARCHETYPES = (
    ("DJI M200 V2", 1.45, 24.0, 32.4, 81.0, 2.24),
    ("Falcon 8", 2.0, 26.0, 28.0, 70.0, 1.8),
    ("HeavyLift H1", 3.0, 30.0, 24.0, 50.0, 1.5),
    ("Sprint S1", 1.0, 18.0, 26.0, 90.0, 1.0),
    ("Ranger R2", 2.5, 40.0, 44.0, 68.0, 2.0),
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs for one generated scenario; ranges follow the experiment design."""

    node_count: int = 20
    pads_per_node: int = 5
    drone_count: int = 50
    request_count: int = 1
    service_count: int | None = None
    battery_rate: float = 25.0  # percent per 10 km at 1 kg
    frame_mass: float = 3.0
    failure_rate: float = 0.2
    runs_per_point: int | None = None
    seed: int = 0
    area_extent_km: float = 30.0
    #: Minimum straight-line source-destination separation; None derives
    #: 45% of the extent, keeping requests in the multi-leg regime the
    #: composition problem is about.
    min_request_separation_km: float | None = None
    package_weight: float = 1.0
    wind_epoch_hours: float = 0.5
    wind_max_speed: float = 20.0
    wind_horizon_hours: float = 24.0
    hot_node_fraction: float = 0.3
    rush_blocks_per_hot_node: int = 2
    rush_duration_h: float = 1.0
    max_early_min: float = 10.0
    max_late_min: float = 30.0
    congestion_shift_h: float = 0.75

    def __post_init__(self):
        if not 10 <= self.node_count <= 60:
            raise ConfigError(f"node_count must be in [10, 60], got {self.node_count}")
        if self.pads_per_node < 1:
            raise ConfigError("pads_per_node must be >= 1")
        if not 1 <= self.drone_count <= 200:
            raise ConfigError("drone_count out of range")
        if not 0.0 <= self.failure_rate <= 0.5:
            raise ConfigError(f"failure_rate must be in [0, 0.5], got {self.failure_rate}")
        if self.service_count is not None and not 500 <= self.service_count <= 2500:
            raise ConfigError("service_count, when pinned, must be in [500, 2500]")
        if self.battery_rate <= 0 or self.package_weight <= 0 or self.area_extent_km <= 0:
            raise ConfigError("battery_rate, package_weight, area_extent_km must be > 0")
        if self.wind_epoch_hours <= 0 or self.wind_horizon_hours <= 0:
            raise ConfigError("wind timeline parameters must be > 0")
        if self.wind_max_speed < 0:
            raise ConfigError("wind_max_speed must be >= 0")
        if self.runs_per_point is not None and self.runs_per_point < 1:
            raise ConfigError("runs_per_point must be >= 1")
        if self.min_request_separation_km is not None and self.min_request_separation_km < 0:
            raise ConfigError("min_request_separation_km must be >= 0")

    @property
    def request_separation_km(self) -> float:
        if self.min_request_separation_km is not None:
            return self.min_request_separation_km
        return 0.45 * self.area_extent_km

    @property
    def effective_runs_per_point(self) -> int:
        """Default run count: 10% of the node count, at least one."""
        if self.runs_per_point is not None:
            return self.runs_per_point
        return max(1, round(0.10 * self.node_count))

    def energy(self) -> EnergyParams:
        return EnergyParams(self.battery_rate, self.frame_mass)

    def perturbation(self, seed: int | None = None) -> PerturbationModel:
        return PerturbationModel(
            failure_rate=self.failure_rate,
            max_early_h=self.max_early_min / 60.0,
            max_late_h=self.max_late_min / 60.0,
            congestion_shift_h=self.congestion_shift_h,
            seed=self.seed if seed is None else seed,
        )


@dataclass
class Scenario:
    """One generated world: network, fleet, wind, and the delivery request."""

    network: SkywayNetwork
    drones: list[DroneSpec]
    wind: WindField
    request: DeliveryRequest
    perturbation: PerturbationModel
    energy: EnergyParams = field(default_factory=EnergyParams)

    @property
    def service_count(self) -> int:
        """Segment-service instances: active drones times segments."""
        return len(self.network.segments()) * len(self.drones)


def _knn_mst_edges(positions: np.ndarray, k: int = 3) -> list[tuple[int, int]]:
    n = len(positions)
    dist = squareform(pdist(positions))
    edges = set()
    for i in range(n):
        order = np.argsort(dist[i], kind="stable")
        picked = 0
        for j in order:
            if j == i:
                continue
            edges.add((min(i, int(j)), max(i, int(j))))
            picked += 1
            if picked == k:
                break
    mst = minimum_spanning_tree(dist).tocoo()
    for i, j in zip(mst.row, mst.col):
        edges.add((min(int(i), int(j)), max(int(i), int(j))))
    return sorted(edges)


def _sample_catalog(rng: np.random.Generator, count: int) -> list[DroneSpec]:
    drones = []
    for idx in range(count):
        name, payload, flight_time, flight_range, speed, recharge = DRONE_ARCHETYPES[
            idx % len(DRONE_ARCHETYPES)
        ]
        speed_j = speed * rng.uniform(0.9, 1.1)
        time_j = flight_time * rng.uniform(0.9, 1.1)
        range_j = min(flight_range * rng.uniform(0.95, 1.05), speed_j * time_j / 60.0)
        drones.append(
            DroneSpec(
                id=f"d{idx:03d}",
                name=name,
                payload_capacity=payload * rng.uniform(1.0, 1.2),
                flight_time=time_j,
                flight_range=range_j,
                speed=speed_j,
                recharge_time_full=recharge * rng.uniform(0.9, 1.15),
            )
        )
    return drones


def _rush_hours(
    rng: np.random.Generator, network: SkywayNetwork, config: ScenarioConfig
) -> None:
    hot_count = round(config.hot_node_fraction * config.node_count)
    if hot_count == 0 or config.rush_blocks_per_hot_node == 0:
        return
    ids = network.node_ids()
    hot = sorted(
        (ids[i] for i in rng.choice(len(ids), size=hot_count, replace=False)), key=repr
    )
    for nid in hot:
        calendar = network.calendar(nid)
        for _ in range(config.rush_blocks_per_hot_node):
            start = float(rng.uniform(0.25, 4.0))
            duration = config.rush_duration_h * float(rng.uniform(0.7, 1.3))
            for pad in range(calendar.pad_count):
                calendar.reserve_on_pad(pad, start + float(rng.uniform(0.0, 0.25)), duration)


def _wind_timeline(rng: np.random.Generator, config: ScenarioConfig) -> WindField:
    epochs = []
    t = 0.0
    while t < config.wind_horizon_hours:
        sample = WindSample(
            speed=float(rng.uniform(0.0, config.wind_max_speed)),
            bearing=float(rng.uniform(0.0, 360.0)),
        )
        epochs.append((t, sample))
        t += config.wind_epoch_hours
    return WindField(tuple(epochs))


def generate_scenario(config: ScenarioConfig) -> Scenario:
    """Fully deterministic scenario for the given config (seed included)."""
    rng = np.random.default_rng(config.seed)
    n = config.node_count
    positions = rng.uniform(0.0, config.area_extent_km, size=(n, 2))
    edges = _knn_mst_edges(positions, k=3)
    network = SkywayNetwork.build(
        {i: (float(x), float(y)) for i, (x, y) in enumerate(positions)},
        edges,
        pad_count=config.pads_per_node,
    )
    _rush_hours(rng, network, config)
    drones = _sample_catalog(rng, config.drone_count)
    wind = _wind_timeline(rng, config)
    best_pair = None
    best_sep = -1.0
    for _ in range(200):
        src_idx, dst_idx = (int(v) for v in rng.choice(n, size=2, replace=False))
        sep = network.straight_line_km(src_idx, dst_idx)
        if sep > best_sep:
            best_pair, best_sep = (src_idx, dst_idx), sep
        if sep >= config.request_separation_km:
            break
    request = DeliveryRequest(
        source=best_pair[0],
        destination=best_pair[1],
        package_weight=config.package_weight,
        start_time=0.0,
    )
    return Scenario(
        network=network,
        drones=drones,
        wind=wind,
        request=request,
        perturbation=config.perturbation(),
        energy=config.energy(),
    )


# --- scenario file format -------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict:
    net = scenario.network
    return {
        "network": {
            "nodes": [
                {
                    "id": nid,
                    "position": list(net.nodes[nid].position),
                    "pad_count": net.nodes[nid].pad_count,
                    "calendar": [
                        [list(iv) for iv in pad] for pad in net.nodes[nid].calendar.pads
                    ],
                }
                for nid in net.node_ids()
            ],
            "segments": [[seg.node_a, seg.node_b] for seg in sorted(net.segments(), key=lambda s: (repr(s.node_a), repr(s.node_b)))],
        },
        "drones": [
            {
                "id": d.id,
                "name": d.name,
                "payload_capacity": d.payload_capacity,
                "flight_time": d.flight_time,
                "flight_range": d.flight_range,
                "speed": d.speed,
                "recharge_time_full": d.recharge_time_full,
            }
            for d in scenario.drones
        ],
        "wind": [
            {"start": start, "speed": sample.speed, "bearing": sample.bearing}
            for start, sample in scenario.wind.epochs
        ],
        "request": {
            "source": scenario.request.source,
            "destination": scenario.request.destination,
            "package_weight": scenario.request.package_weight,
            "start_time": scenario.request.start_time,
        },
        "perturbation": {
            "failure_rate": scenario.perturbation.failure_rate,
            "max_early_h": scenario.perturbation.max_early_h,
            "max_late_h": scenario.perturbation.max_late_h,
            "congestion_shift_h": scenario.perturbation.congestion_shift_h,
            "seed": scenario.perturbation.seed,
        },
        "energy": {
            "base_rate_pct_per_10km": scenario.energy.base_rate_pct_per_10km,
            "frame_mass_kg": scenario.energy.frame_mass_kg,
        },
    }


def scenario_from_dict(doc: dict) -> Scenario:
    try:
        net_doc = doc["network"]
        nodes = []
        for node_doc in net_doc["nodes"]:
            calendar = PadCalendar.from_intervals(
                [[tuple(iv) for iv in pad] for pad in node_doc.get("calendar", [])]
                or [[] for _ in range(node_doc["pad_count"])]
            )
            nodes.append(
                Node(
                    id=node_doc["id"],
                    position=tuple(node_doc["position"]),
                    pad_count=node_doc["pad_count"],
                    calendar=calendar,
                )
            )
        by_id = {n.id: n for n in nodes}
        segments = []
        for a, b in net_doc["segments"]:
            pa, pb = by_id[a].position, by_id[b].position
            segments.append(
                SkywaySegment(a, b, math.dist(pa, pb), compass_bearing(pa, pb))
            )
        network = SkywayNetwork(nodes, segments)
        drones = [DroneSpec(**d) for d in doc["drones"]]
        wind = WindField(
            tuple(
                (w["start"], WindSample(w["speed"], w["bearing"]))
                for w in doc["wind"]
            )
        )
        request = DeliveryRequest(**doc["request"])
        perturbation = PerturbationModel(**doc["perturbation"])
        energy_doc = doc.get("energy", {})
        energy = EnergyParams(
            base_rate_pct_per_10km=energy_doc.get("base_rate_pct_per_10km", 25.0),
            frame_mass_kg=energy_doc.get("frame_mass_kg", 3.0),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed scenario document: {exc}") from exc
    return Scenario(network, drones, wind, request, perturbation, energy)


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return scenario_from_dict(json.load(fh))


def load_catalog(path) -> list[DroneSpec]:
    """Drone catalog file: a JSON list of drone objects."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    try:
        return [DroneSpec(**entry) for entry in doc]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed drone catalog: {exc}") from exc
