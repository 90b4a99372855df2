"""Scenario generation determinism, connectivity, and file round-trips."""

import pytest

from skyway.errors import ConfigError
from skyway.scenario import (
    Scenario,
    ScenarioConfig,
    generate_scenario,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)


class TestConfigValidation:
    def test_defaults_valid(self):
        ScenarioConfig()

    def test_node_count_range(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(node_count=9)
        with pytest.raises(ConfigError):
            ScenarioConfig(node_count=61)

    def test_failure_rate_range(self):
        with pytest.raises(ConfigError):
            ScenarioConfig(failure_rate=0.6)
        ScenarioConfig(failure_rate=0.0)  # fixpoint runs are allowed

    def test_runs_per_point_default(self):
        assert ScenarioConfig(node_count=10).effective_runs_per_point == 1
        assert ScenarioConfig(node_count=60).effective_runs_per_point == 6
        assert ScenarioConfig(runs_per_point=30).effective_runs_per_point == 30


class TestGeneration:
    def test_same_seed_same_scenario(self):
        a = generate_scenario(ScenarioConfig(node_count=12, seed=42))
        b = generate_scenario(ScenarioConfig(node_count=12, seed=42))
        assert scenario_to_dict(a) == scenario_to_dict(b)

    def test_different_seed_differs(self):
        a = generate_scenario(ScenarioConfig(node_count=12, seed=1))
        b = generate_scenario(ScenarioConfig(node_count=12, seed=2))
        assert scenario_to_dict(a) != scenario_to_dict(b)

    def test_node_and_pad_counts(self):
        scenario = generate_scenario(ScenarioConfig(node_count=10, pads_per_node=5, seed=3))
        assert len(scenario.network.nodes) == 10
        assert all(n.pad_count == 5 for n in scenario.network.nodes.values())

    @pytest.mark.parametrize("seed", range(25))
    def test_connected_across_seeds(self, seed):
        # SkywayNetwork.build raises if the graph is disconnected
        scenario = generate_scenario(ScenarioConfig(node_count=15, seed=seed))
        assert len(scenario.network.nodes) == 15

    def test_request_endpoints_distinct(self):
        for seed in range(10):
            scenario = generate_scenario(ScenarioConfig(node_count=10, seed=seed))
            assert scenario.request.source != scenario.request.destination

    def test_catalog_size_and_validity(self):
        scenario = generate_scenario(ScenarioConfig(node_count=10, drone_count=55, seed=5))
        assert len(scenario.drones) == 55
        assert all(d.payload_capacity >= 1.0 for d in scenario.drones)

    def test_rush_hours_create_busy_pads(self):
        scenario = generate_scenario(ScenarioConfig(node_count=20, seed=8))
        busy = sum(
            1
            for node in scenario.network.nodes.values()
            for pad in node.calendar.pads
            if pad
        )
        assert busy > 0

    def test_service_count_emergent(self):
        scenario = generate_scenario(ScenarioConfig(node_count=20, drone_count=50, seed=9))
        assert scenario.service_count == len(scenario.network.segments()) * 50


class TestRoundTrip:
    def test_dict_round_trip(self):
        scenario = generate_scenario(ScenarioConfig(node_count=12, seed=13))
        doc = scenario_to_dict(scenario)
        again = scenario_from_dict(doc)
        assert scenario_to_dict(again) == doc

    def test_file_round_trip(self, tmp_path):
        scenario = generate_scenario(ScenarioConfig(node_count=12, seed=13))
        path = tmp_path / "scenario.json"
        save_scenario(scenario, path)
        loaded = load_scenario(path)
        assert scenario_to_dict(loaded) == scenario_to_dict(scenario)

    def test_malformed_document_rejected(self):
        with pytest.raises(ConfigError):
            scenario_from_dict({"network": {"nodes": [], "segments": []}})
