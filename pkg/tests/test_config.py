from pathlib import Path

import pytest

from eocsim import ActionType, ConfigError, ScenarioConfig, load_config

REPO_CONFIG = Path(__file__).resolve().parents[1] / "configs" / "cairo.toml"


def write_config(tmp_path, text):
    path = tmp_path / "scenario.toml"
    path.write_text(text)
    return path


def test_shipped_scenario_loads():
    config = load_config(REPO_CONFIG)
    assert config.population == 1000
    assert config.initial_infected == 3
    assert config.duration_days == 50
    assert config.eoc.operational == 3
    assert config.eoc.tactical == 2
    assert config.eoc.name == "Cairo"
    assert config.pool_spec.efficacy == 0.75
    assert config.planner.generations == 20


def test_defaults_fill_missing_tables(tmp_path):
    path = write_config(tmp_path, "[scenario]\npopulation = 500\n")
    config = load_config(path)
    assert config.population == 500
    assert config.duration_days == 50
    assert config.memory.match_radius == 30


def test_population_zero_names_field(tmp_path):
    path = write_config(tmp_path, "[scenario]\npopulation = 0\n")
    with pytest.raises(ConfigError, match="population"):
        load_config(path)


def test_initial_infected_bounds(tmp_path):
    path = write_config(tmp_path,
                        "[scenario]\npopulation = 10\ninitial_infected = 11\n")
    with pytest.raises(ConfigError, match="initial_infected"):
        load_config(path)


def test_unknown_key_rejected(tmp_path):
    path = write_config(tmp_path, "[scenario]\npopulaton = 100\n")
    with pytest.raises(ConfigError, match="populaton"):
        load_config(path)


def test_unknown_table_rejected(tmp_path):
    path = write_config(tmp_path, "[diseases]\ncase_fatality = 0.5\n")
    with pytest.raises(ConfigError, match="diseases"):
        load_config(path)


def test_disease_range_validated(tmp_path):
    path = write_config(tmp_path, "[disease]\ntransmission_prob = 1.5\n")
    with pytest.raises(ConfigError, match="transmission_prob"):
        load_config(path)


def test_malformed_toml_reported(tmp_path):
    path = write_config(tmp_path, "[scenario\npopulation = 1\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_random_pool_draw_is_seeded():
    config = ScenarioConfig(seed=7)
    one = config.resolve_pool()
    two = config.resolve_pool()
    assert [one.template(t) for t in ActionType] == [two.template(t) for t in ActionType]
    other = ScenarioConfig(seed=8).resolve_pool()
    assert [one.template(t) for t in ActionType] != [other.template(t) for t in ActionType]


def test_random_pool_respects_ranges():
    spec = ScenarioConfig().pool_spec
    pool = ScenarioConfig(seed=123).resolve_pool()
    for kind in ActionType:
        template = pool.template(kind)
        assert spec.amount_min <= template.available <= spec.amount_max
        assert spec.unit_cost_min <= template.unit_cost <= spec.unit_cost_max
        assert template.efficacy == spec.efficacy
        assert template.max_concurrent == spec.max_concurrent


def test_for_round_offsets_seed():
    config = ScenarioConfig(seed=42)
    assert config.for_round(0).seed == 42
    assert config.for_round(3).seed == 45
    assert config.for_round(1).population == config.population


EXPLICIT_POOL = """
[scenario]
population = 200

[[pool.templates]]
action_type = "QUARANTINING"
available = 150
unit_cost = 0.1
efficacy = 0.6
max_concurrent = 2

[[pool.templates]]
action_type = "MASS_VACCINATION"
available = 80
unit_cost = 0.5
efficacy = 0.75
"""


def test_explicit_pool_templates(tmp_path):
    config = load_config(write_config(tmp_path, EXPLICIT_POOL))
    pool = config.resolve_pool()
    assert set(pool.templates) == {ActionType.QUARANTINING, ActionType.MASS_VACCINATION}
    quarantine = pool.template(ActionType.QUARANTINING)
    assert (quarantine.available, quarantine.unit_cost, quarantine.efficacy,
            quarantine.max_concurrent) == (150, 0.1, 0.6, 2)
    assert pool.template(ActionType.MASS_VACCINATION).max_concurrent == 3  # default
    # every round sees the same fixed pool
    assert config.for_round(4).resolve_pool().templates == pool.templates


def test_explicit_pool_rejects_random_keys(tmp_path):
    text = EXPLICIT_POOL + "\n[pool]\nefficacy = 0.75\n"
    with pytest.raises(ConfigError, match="cannot be combined"):
        load_config(write_config(tmp_path, text))


def test_explicit_pool_bad_action_type(tmp_path):
    text = """
[[pool.templates]]
action_type = "CURFEW"
available = 10
unit_cost = 0.1
efficacy = 0.5
"""
    with pytest.raises(ConfigError, match="action_type"):
        load_config(write_config(tmp_path, text))


def test_explicit_pool_duplicate_type(tmp_path):
    text = """
[[pool.templates]]
action_type = "AWARENESS"
available = 10
unit_cost = 0.1
efficacy = 0.5

[[pool.templates]]
action_type = "AWARENESS"
available = 20
unit_cost = 0.2
efficacy = 0.5
"""
    with pytest.raises(ConfigError, match="duplicate"):
        load_config(write_config(tmp_path, text))
