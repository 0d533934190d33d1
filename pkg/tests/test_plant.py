import pytest

from fuzzctl.errors import SchemaError
from fuzzctl.kb import ImpactRule
from fuzzctl.plant import (
    DisturbanceProfile,
    EnvironmentState,
    initial_state,
    situation_from_state,
    step_plant,
)


def test_fixed_point_tick(inventory_kb):
    state = EnvironmentState({"stock": 30.0, "demand_actual": 0.0}, tick=4)
    out = step_plant(state, (), {}, inventory_kb.plant_schema)
    assert out.variables == state.variables
    assert out.tick == 5
    assert state.tick == 4  # input untouched


def test_inventory_balance(inventory_kb):
    state = EnvironmentState({"stock": 10.0, "demand_actual": 5.0})
    out = step_plant(state, (ImpactRule("order", delta=40.0),), {}, inventory_kb.plant_schema)
    assert out.variables["stock"] == 45.0


def test_clamp_at_zero(inventory_kb):
    state = EnvironmentState({"stock": 2.0, "demand_actual": 10.0})
    out = step_plant(state, (), {}, inventory_kb.plant_schema)
    assert out.variables["stock"] == 0.0


def test_clamp_at_capacity(inventory_kb):
    state = EnvironmentState({"stock": 90.0, "demand_actual": 0.0})
    out = step_plant(state, (ImpactRule("order", delta=40.0),), {}, inventory_kb.plant_schema)
    assert out.variables["stock"] == 100.0


def test_set_value_impact_overrides(inventory_kb):
    state = EnvironmentState({"stock": 10.0, "demand_actual": 5.0})
    out = step_plant(state, (ImpactRule("stock", set_value=77.0),), {},
                     inventory_kb.plant_schema)
    assert out.variables["stock"] == 77.0


def test_disturbance_drains_stock(inventory_kb):
    state = EnvironmentState({"stock": 50.0, "demand_actual": 5.0})
    out = step_plant(state, (), {"stock": 3.0}, inventory_kb.plant_schema)
    assert out.variables["stock"] == 42.0


def test_unknown_impact_variable(inventory_kb):
    state = initial_state(inventory_kb.plant_schema)
    with pytest.raises(SchemaError):
        step_plant(state, (ImpactRule("s", delta=1.0),), {}, inventory_kb.plant_schema)
    with pytest.raises(SchemaError):
        step_plant(state, (), {"phantom": 1.0}, inventory_kb.plant_schema)


def test_impact_rule_needs_exactly_one_effect():
    with pytest.raises(SchemaError):
        ImpactRule("order")
    with pytest.raises(SchemaError):
        ImpactRule("order", delta=1.0, set_value=2.0)


def test_initial_state_from_schema(inventory_kb):
    state = initial_state(inventory_kb.plant_schema)
    assert state.variables == {"stock": 10.0, "demand_actual": 5.0}
    assert state.tick == 0


# -- disturbance profiles -------------------------------------------------------

def test_sequence_disturbance_indexed_by_tick():
    profile = DisturbanceProfile(sequences={"stock": (1.0, 2.0)})
    assert profile.value_at(0) == {"stock": 1.0}
    assert profile.value_at(1) == {"stock": 2.0}
    assert profile.value_at(2) == {"stock": 0.0}  # past the end


def test_seeded_uniform_is_reproducible_and_pure():
    a = DisturbanceProfile(seed=7, uniform={"stock": (-1.0, 1.0)})
    b = DisturbanceProfile(seed=7, uniform={"stock": (-1.0, 1.0)})
    values = [a.value_at(t)["stock"] for t in range(10)]
    assert values == [b.value_at(t)["stock"] for t in range(10)]
    assert a.value_at(3) == a.value_at(3)
    assert all(-1.0 <= v <= 1.0 for v in values)
    other_seed = DisturbanceProfile(seed=8, uniform={"stock": (-1.0, 1.0)})
    assert values != [other_seed.value_at(t)["stock"] for t in range(10)]


# -- reading fuzzification --------------------------------------------------------

def test_situation_from_state_snaps_readings(inventory_kb):
    state = EnvironmentState({"stock": 47.0, "demand_actual": 5.0}, tick=3)
    situation = situation_from_state(inventory_kb, state, "obs_3")
    assert situation.assignments["stock"].memberships == (0.0, 0.0, 1.0, 0.0, 0.0)
    assert situation.assignments["demand"].memberships[5] == 1.0
    assert situation.id == "obs_3"
