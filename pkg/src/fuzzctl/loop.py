"""Closed-loop composition: read the plant, enumerate alternatives, decide,
act, log. Trajectories are pure functions of (kb, initial state, steps,
disturbance seed, policy)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .errors import NoAlternatives
from .kb import KnowledgeBase
from .plant import (
    AccumulatorPlant,
    DisturbanceProfile,
    EnvironmentState,
    full_situation_from_state,
    initial_state,
)
from .reasoning import alternatives_for_policy, chosen_alternative, decide
from .situations import DecisionRecord


@dataclass
class TickRecord:
    """One trajectory row: the state reached at this tick and the decision
    that produced it (empty on the initial row and on no-op ticks)."""

    tick: int
    state: dict[str, float]
    decision_id: str = ""
    score: float | None = None
    situation_id: str = ""


@dataclass
class ClosedLoopResult:
    records: list[TickRecord]
    decisions: dict[str, DecisionRecord] = field(default_factory=dict)

    @property
    def final_state(self) -> dict[str, float]:
        return self.records[-1].state


def run_closed_loop(kb: KnowledgeBase, initial: EnvironmentState | None = None,
                    steps: int = 0,
                    disturbance: DisturbanceProfile | None = None,
                    policy: str = "wisdom",
                    theta: float = 0.5) -> ClosedLoopResult:
    """Run the modelling / decision / control cycle for a number of ticks.

    A tick with no applicable alternative is logged as a no-op and the
    loop stays live. The first record is the initial state itself.
    """
    result = ClosedLoopResult(records=[])
    for record in iter_closed_loop(kb, initial, steps, disturbance, policy, theta,
                                   result.decisions):
        result.records.append(record)
    return result


def iter_closed_loop(kb: KnowledgeBase, initial: EnvironmentState | None,
                     steps: int, disturbance: DisturbanceProfile | None,
                     policy: str, theta: float,
                     decisions_out: dict[str, DecisionRecord] | None = None
                     ) -> Iterator[TickRecord]:
    """Incremental form of run_closed_loop, yielding records tick by tick."""
    state = (initial.copy() if initial is not None else initial_state(kb.plant_schema))
    profile = disturbance or DisturbanceProfile.zero()
    plant = AccumulatorPlant(kb.plant_schema)
    yield TickRecord(tick=state.tick, state=dict(state.variables))
    for _ in range(steps):
        full = full_situation_from_state(kb, state, f"obs_{state.tick}")
        alternatives = alternatives_for_policy(full, kb, policy, mu_d=1.0, theta=theta)
        try:
            decision = decide(alternatives)
        except NoAlternatives:
            state = plant.step(state, (), profile.value_at(state.tick))
            yield TickRecord(tick=state.tick, state=dict(state.variables),
                             situation_id=full.situation.id)
            continue
        if decisions_out is not None:
            alt = chosen_alternative(alternatives, decision)
            decisions_out[decision.id] = DecisionRecord(decision, alt.trace)
        state = plant.step(state, decision.impacts, profile.value_at(state.tick))
        yield TickRecord(
            tick=state.tick,
            state=dict(state.variables),
            decision_id=decision.id,
            score=decision.score,
            situation_id=full.situation.id,
        )


def trajectory_csv(kb: KnowledgeBase, records: list[TickRecord]) -> str:
    """Line-delimited export: tick, state variables in schema order,
    decision id, score. Stable field formatting for golden files."""
    names = kb.plant_schema.state_names()
    lines = ["tick," + ",".join(names) + ",decision_id,score"]
    for r in records:
        score = "" if r.score is None else repr(r.score)
        values = ",".join(repr(r.state[n]) for n in names)
        lines.append(f"{r.tick},{values},{r.decision_id},{score}")
    return "\n".join(lines) + "\n"
