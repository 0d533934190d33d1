import dataclasses

from fuzzctl.inference import fuzzify
from fuzzctl.kb import FullSituation, RepresentationLevel, Situation
from fuzzctl.loop import run_closed_loop, trajectory_csv
from fuzzctl.plant import (
    DisturbanceProfile,
    EnvironmentState,
    initial_state,
    situation_from_state,
    step_plant,
)
from fuzzctl.reasoning import decide, enumerate_alternatives
from fuzzctl.situations import apply_act


def test_zero_steps_yields_initial_only(inventory_kb):
    result = run_closed_loop(inventory_kb, steps=0)
    assert len(result.records) == 1
    assert result.records[0].state == {"stock": 10.0, "demand_actual": 5.0}
    assert result.records[0].decision_id == ""


def test_reference_run_reaches_and_holds_the_band(inventory_kb):
    result = run_closed_loop(inventory_kb, steps=100)
    stocks = [r.state["stock"] for r in result.records]
    entered = next(i for i, s in enumerate(stocks) if 40.0 <= s <= 60.0)
    assert entered <= 20
    assert all(40.0 <= s <= 60.0 for s in stocks[entered:])
    assert len(stocks) == 101


def test_identical_inputs_identical_trajectories(inventory_kb):
    profile = DisturbanceProfile(seed=3, uniform={"stock": (-2.0, 2.0)})
    a = run_closed_loop(inventory_kb, steps=40, disturbance=profile)
    b = run_closed_loop(inventory_kb, steps=40,
                        disturbance=DisturbanceProfile(seed=3, uniform={"stock": (-2.0, 2.0)}))
    assert a.records == b.records
    assert trajectory_csv(inventory_kb, a.records) == trajectory_csv(inventory_kb, b.records)


def test_different_seed_changes_trajectory(inventory_kb):
    a = run_closed_loop(inventory_kb, steps=40,
                        disturbance=DisturbanceProfile(seed=3, uniform={"stock": (-3.0, 3.0)}))
    b = run_closed_loop(inventory_kb, steps=40,
                        disturbance=DisturbanceProfile(seed=4, uniform={"stock": (-3.0, 3.0)}))
    assert a.records != b.records


def test_states_respect_bounds_under_disturbance(inventory_kb):
    profile = DisturbanceProfile(seed=9, uniform={"stock": (-30.0, 30.0)})
    result = run_closed_loop(inventory_kb, steps=80, disturbance=profile)
    for record in result.records:
        assert 0.0 <= record.state["stock"] <= 100.0
        assert 0.0 <= record.state["demand_actual"] <= 10.0


def test_actless_kb_logs_noop_ticks(inventory_kb):
    bare = dataclasses.replace(inventory_kb, elementary_acts=())
    result = run_closed_loop(bare, steps=5)
    assert len(result.records) == 6
    assert all(r.decision_id == "" for r in result.records)
    # the plant still drains while the engine stays live
    assert result.records[1].state["stock"] == 5.0
    assert result.records[2].state["stock"] == 0.0


def test_intuition_policy_runs(inventory_kb):
    result = run_closed_loop(inventory_kb, steps=30, policy="intuition")
    stocks = [r.state["stock"] for r in result.records]
    assert all(40.0 <= s <= 60.0 for s in stocks[1:])


def test_trajectory_csv_layout(inventory_kb):
    result = run_closed_loop(inventory_kb, steps=2)
    lines = trajectory_csv(inventory_kb, result.records).splitlines()
    assert lines[0] == "tick,stock,demand_actual,decision_id,score"
    assert lines[1] == "0,10.0,5.0,,"
    assert lines[2] == "1,45.0,5.0,d_act_restock_large,1.0"
    assert lines[3] == "2,45.0,5.0,d_act_restock_small,1.0"


def test_decisions_are_recorded_for_explanation(inventory_kb):
    result = run_closed_loop(inventory_kb, steps=3)
    assert "d_act_restock_large" in result.decisions
    record = result.decisions["d_act_restock_large"]
    assert record.trace.final_decision_ref == "d_act_restock_large"


# -- the commutation instance -----------------------------------------------------

def test_commute_plant_diagram_commutes(commute_kb):
    """Reading then acting predicts exactly what stepping then reading
    observes, for every grid state of the coarse plant."""
    schema = commute_kb.plant_schema
    variable = commute_kb.variable("level")
    for grid_value in variable.universe.points:
        state = EnvironmentState({"level": grid_value, "usage": 10.0}, tick=0)

        # model path: fuzzify, pick the applicable act, read its target
        situation = situation_from_state(commute_kb, state, "obs")
        full = FullSituation(situation, state, 0)
        decision = decide(enumerate_alternatives(full, commute_kb, 1.0, 0.5))
        act = commute_kb.act(decision.act_ref)
        applied = apply_act(full, act, commute_kb, 0.5)
        model_view = applied.target.assignments["level"].memberships

        # environment path: step the plant, fuzzify the new reading
        stepped = step_plant(state, act.impacts, {}, schema)
        observed = fuzzify(stepped.variables["level"], variable).singleton.memberships

        assert all(abs(a - b) <= 1e-12 for a, b in zip(model_view, observed))
