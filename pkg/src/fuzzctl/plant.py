"""The controlled organizational unit: a discrete-time single-accumulator
plant with bounded state, control impacts and reproducible disturbances.

The update rule is the inventory balance: the stock variable gains the
summed inflow impacts and loses the drain reading and the disturbance,
clamped to its schema bounds. Dynamics are pluggable through PlantModel so
other units can reuse the loop machinery.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Protocol

from .errors import SchemaError
from .inference import fuzzify
from .kb import (
    FullSituation,
    ImpactRule,
    KnowledgeBase,
    PlantSchema,
    RepresentationLevel,
    Situation,
)


@dataclass
class EnvironmentState:
    """Crisp plant variables at one tick; values stay inside schema bounds."""

    variables: dict[str, float]
    tick: int = 0

    def copy(self) -> "EnvironmentState":
        return EnvironmentState(dict(self.variables), self.tick)


def initial_state(schema: PlantSchema) -> EnvironmentState:
    return EnvironmentState({v.name: v.initial for v in schema.state}, tick=0)


@dataclass
class DisturbanceProfile:
    """Reproducible disturbance source.

    Explicit per-variable sequences are indexed by tick (0 past the end);
    seeded uniform ranges derive an independent value per (seed, tick,
    variable), so lookups are pure and order-independent.
    """

    sequences: dict[str, tuple[float, ...]] = field(default_factory=dict)
    seed: int = 0
    uniform: dict[str, tuple[float, float]] = field(default_factory=dict)

    def value_at(self, tick: int) -> dict[str, float]:
        values: dict[str, float] = {}
        for name, seq in self.sequences.items():
            values[name] = seq[tick] if tick < len(seq) else 0.0
        for name, (low, high) in self.uniform.items():
            rng = random.Random(f"{self.seed}:{tick}:{name}")
            values[name] = rng.uniform(low, high)
        return values

    @classmethod
    def zero(cls, seed: int = 0) -> "DisturbanceProfile":
        return cls(seed=seed)


class PlantModel(Protocol):
    def step(self, state: EnvironmentState, impacts: Iterable[ImpactRule],
             disturbance: Mapping[str, float]) -> EnvironmentState: ...


def _clamp(value: float, low: float, high: float) -> float:
    return min(max(value, low), high)


@dataclass
class AccumulatorPlant:
    """Single-stock balance dynamics configured from the KB plant schema."""

    schema: PlantSchema

    def step(self, state: EnvironmentState, impacts: Iterable[ImpactRule],
             disturbance: Mapping[str, float]) -> EnvironmentState:
        schema = self.schema
        known = set(schema.state_names()) | set(schema.controls)
        inflow = 0.0
        direct: dict[str, float] = {}
        overrides: dict[str, float] = {}
        for impact in impacts:
            if impact.target_variable not in known:
                raise SchemaError(f"impact targets unknown plant variable {impact.target_variable}")
            if impact.target_variable == schema.inflow_variable:
                if impact.delta is not None:
                    inflow += impact.delta
                else:
                    inflow = impact.set_value
            elif impact.delta is not None:
                direct[impact.target_variable] = direct.get(impact.target_variable, 0.0) + impact.delta
            else:
                overrides[impact.target_variable] = impact.set_value
        for name in disturbance:
            if name not in known:
                raise SchemaError(f"disturbance targets unknown plant variable {name}")

        new_vars: dict[str, float] = {}
        drain = state.variables[schema.drain_variable]
        for var in schema.state:
            value = state.variables[var.name]
            if var.name == schema.stock_variable:
                value = value + inflow - drain - disturbance.get(var.name, 0.0)
            else:
                value = value + disturbance.get(var.name, 0.0)
            value += direct.get(var.name, 0.0)
            if var.name in overrides:
                value = overrides[var.name]
            new_vars[var.name] = _clamp(value, var.minimum, var.maximum)
        return EnvironmentState(new_vars, state.tick + 1)


def step_plant(state: EnvironmentState, impacts: Iterable[ImpactRule],
               disturbance: Mapping[str, float], schema: PlantSchema) -> EnvironmentState:
    """One tick of the default accumulator dynamics."""
    return AccumulatorPlant(schema).step(state, impacts, disturbance)


def situation_from_state(kb: KnowledgeBase, state: EnvironmentState,
                         situation_id: str) -> Situation:
    """Fuzzify the mapped plant readings into a situation over the KB's
    linguistic variables (singleton assignments at the snapped grid points)."""
    assignments = {}
    for lvar, pvar in kb.plant_schema.readings.items():
        assignments[lvar] = fuzzify(state.variables[pvar], kb.variable(lvar)).singleton
    return Situation(
        id=situation_id,
        assignments=assignments,
        level=RepresentationLevel.SEMANTIC_FRAMES,
        annotation=f"readings at tick {state.tick}",
    )


def full_situation_from_state(kb: KnowledgeBase, state: EnvironmentState,
                              situation_id: str) -> FullSituation:
    return FullSituation(situation_from_state(kb, state, situation_id), state, state.tick)
